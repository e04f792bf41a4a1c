#include "backbone/bbm_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "backbone/errors.hpp"
#include "backbone/parallel.hpp"
#include "backbone/rng.hpp"
#include "backbone/stats.hpp"

namespace backbone {

void validate(const SimConfig& c) {
  if (c.law.pmf.empty() || c.law.components.empty()) {
    throw std::invalid_argument("SimConfig: offspring law is empty");
  }
  if (!std::isfinite(c.rho)) throw std::invalid_argument("SimConfig: rho must be finite");
  if (!std::isfinite(c.x0)) throw std::invalid_argument("SimConfig: x0 must be finite");
  if (std::isnan(c.barrier) || c.barrier == std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("SimConfig: barrier must be finite or -inf");
  }
  if (!(c.t_max > 0.0)) throw std::invalid_argument("SimConfig: t_max must be positive");
  for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
    const double t = c.checkpoints[i];
    if (!(t >= 0.0 && t <= c.t_max)) throw std::invalid_argument("SimConfig: checkpoint outside [0, t_max]");
    if (i > 0 && !(t > c.checkpoints[i - 1])) {
      throw std::invalid_argument("SimConfig: checkpoints must be increasing");
    }
  }
  if (c.particle_event_cap <= 0) throw std::invalid_argument("SimConfig: event cap must be positive");
}

namespace {

struct Particle {
  double x;
  double t;
};

void record(SimOutcome& out, std::size_t k, double x) {
  ++out.population[k];
  if (!out.rightmost[k] || *out.rightmost[k] < x) out.rightmost[k] = x;
}

}  // namespace

SimOutcome run_replica(const SimConfig& c, std::uint64_t seed) {
  validate(c);
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  const double q = c.law.q;
  const bool has_barrier = std::isfinite(c.barrier);
  const auto& cps = c.checkpoints;

  SimOutcome out;
  out.rightmost.assign(cps.size(), std::nullopt);
  out.population.assign(cps.size(), 0);
  out.extinct = true;

  if (c.initial == InitialCondition::SingleAncestor) {
    out.initial_count = 1;
  } else {
    std::poisson_distribution<long> pois(c.law.lstar);
    out.initial_count = pois(rng);
  }

  std::vector<Particle> stack;
  if (has_barrier && c.x0 <= c.barrier) {
    out.absorbed_count = out.initial_count;
    return out;
  }
  stack.assign(static_cast<std::size_t>(out.initial_count), Particle{c.x0, 0.0});
  for (std::size_t k = 0; k < cps.size() && cps[k] == 0.0; ++k) {
    for (long i = 0; i < out.initial_count; ++i) record(out, k, c.x0);
  }

  while (!stack.empty()) {
    Particle p = stack.back();
    stack.pop_back();
    const double branch_at =
        c.branching ? p.t - std::log(uniform_open(rng)) / q : std::numeric_limits<double>::infinity();
    // next checkpoint strictly after p.t
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cps.begin(), cps.end(), p.t) - cps.begin());
    for (;;) {
      if (++out.events > c.particle_event_cap) {
        out.capped = true;
        out.extinct = false;
        return out;
      }
      const double cp = k < cps.size() ? cps[k] : std::numeric_limits<double>::infinity();
      const double stop = std::min({branch_at, cp, c.t_max});
      if (stop == std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("run_replica: non-branching particle with infinite horizon");
      }
      const double dt = stop - p.t;
      const double x_new = p.x - c.rho * dt + std::sqrt(dt) * gauss(rng);
      if (has_barrier) {
        bool absorbed = x_new <= c.barrier;
        if (!absorbed && dt > 0.0) {
          const double cross = std::exp(-2.0 * (p.x - c.barrier) * (x_new - c.barrier) / dt);
          absorbed = uniform_open(rng) < cross;
        }
        if (absorbed) {
          ++out.absorbed_count;
          break;
        }
      }
      p.x = x_new;
      p.t = stop;
      if (stop == cp) {
        record(out, k, p.x);
        ++k;
      }
      if (stop == c.t_max) {
        out.extinct = false;
        if (c.stop_on_survival) return out;
        break;
      }
      if (stop == branch_at) {
        const BranchEvent ev = sample_branch_event(c.law, rng);
        for (long i = 1; i < ev.n; ++i) stack.push_back(p);
        stack.push_back(p);
        break;
      }
    }
  }
  return out;
}

std::vector<SimOutcome> run_replicas(const SimConfig& config, std::size_t n_replicas,
                                     std::uint64_t master_seed, unsigned threads) {
  validate(config);
  return parallel_map(n_replicas, threads, [&](std::size_t i) {
    return run_replica(config, stream_seed(master_seed, i));
  });
}

SpeedEstimate estimate_speed(SimConfig config, double t, std::size_t n_replicas,
                             std::uint64_t master_seed, unsigned threads) {
  if (!(t > 0.0)) throw std::invalid_argument("estimate_speed: t must be positive");
  config.t_max = t;
  config.checkpoints = {t};
  config.stop_on_survival = false;
  const auto outcomes = run_replicas(config, n_replicas, master_seed, threads);
  std::vector<double> speeds;
  std::size_t capped = 0, survivors = 0;
  for (const auto& o : outcomes) {
    if (o.capped) {
      ++capped;
      continue;
    }
    if (!o.extinct && o.rightmost[0]) {
      ++survivors;
      speeds.push_back(*o.rightmost[0] / t);
    }
  }
  if (speeds.empty()) throw NoSurvivorsError("estimate_speed: no surviving replica");
  const auto ms = stats::mean_se(speeds);
  return {ms.mean, ms.std_error,
          static_cast<double>(survivors) / static_cast<double>(n_replicas - capped), survivors,
          capped, n_replicas};
}

ExtinctionEstimate estimate_extinction(SimConfig config, std::size_t n_replicas,
                                       std::uint64_t master_seed, unsigned threads,
                                       bool validate_horizon) {
  if (n_replicas == 0) throw std::invalid_argument("estimate_extinction: need replicas");
  config.stop_on_survival = true;
  config.checkpoints.clear();
  auto classify = [&](const SimConfig& cfg) {
    const auto outcomes = run_replicas(cfg, n_replicas, master_seed, threads);
    std::vector<char> extinct(outcomes.size());
    std::size_t capped = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      extinct[i] = outcomes[i].extinct ? 1 : 0;
      capped += outcomes[i].capped ? 1 : 0;
    }
    return std::pair{extinct, capped};
  };
  const auto [extinct, capped] = classify(config);
  const std::size_t k = static_cast<std::size_t>(std::count(extinct.begin(), extinct.end(), 1));
  const double n = static_cast<double>(n_replicas);
  const double p = static_cast<double>(k) / n;
  const auto ci = stats::wilson(k, n_replicas);
  ExtinctionEstimate e{p,        std::sqrt(p * (1 - p) / n), ci.low, ci.high, k, capped,
                       n_replicas, static_cast<double>(capped) > 0.01 * n,
                       std::numeric_limits<double>::quiet_NaN()};
  if (validate_horizon) {
    SimConfig doubled = config;
    doubled.t_max = 2.0 * config.t_max;
    const auto [extinct2, capped2] = classify(doubled);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < extinct.size(); ++i) changed += extinct[i] != extinct2[i] ? 1 : 0;
    e.horizon_disagreement = static_cast<double>(changed) / n;
  }
  return e;
}

std::vector<ExitCount> sample_exit_mass(SimConfig config, std::size_t n_replicas,
                                        std::uint64_t master_seed, unsigned threads) {
  if (!std::isfinite(config.barrier)) {
    throw std::invalid_argument("sample_exit_mass: needs a finite barrier");
  }
  config.t_max = std::numeric_limits<double>::infinity();
  config.checkpoints.clear();
  config.stop_on_survival = false;
  const auto outcomes = run_replicas(config, n_replicas, master_seed, threads);
  std::vector<ExitCount> counts;
  counts.reserve(outcomes.size());
  for (const auto& o : outcomes) counts.push_back({o.absorbed_count, o.capped});
  return counts;
}

}  // namespace backbone
