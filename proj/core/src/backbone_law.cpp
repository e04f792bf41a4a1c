#include "backbone/backbone_law.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

#include "backbone/errors.hpp"
#include "backbone/special.hpp"

namespace backbone {

namespace {

using Kind = OffspringComponent::Kind;

double component_pmf(const OffspringComponent& c, long n) {
  switch (c.kind) {
    case Kind::Quadratic:
      return n == 2 ? c.mass : 0.0;
    case Kind::Atom:
      return c.mass * std::exp(special::log_poisson_pmf(n, c.mean_mu));
    case Kind::Gamma:
      return c.mass * std::exp(special::log_negbin_pmf(n, c.shape, c.prob));
  }
  return 0.0;
}

// Σ_{j > n} p_j and Σ_{j > n} j p_j of one component (n >= 2).
std::pair<double, double> component_tail(const OffspringComponent& c, long n) {
  const double nd = static_cast<double>(n);
  switch (c.kind) {
    case Kind::Quadratic:
      return {0.0, 0.0};
    case Kind::Atom:
      return {c.mass * boost::math::gamma_p(nd + 1.0, c.mean_mu),
              c.mass * c.mean_mu * boost::math::gamma_p(nd, c.mean_mu)};
    case Kind::Gamma: {
      const double odds = c.prob / (1.0 - c.prob);
      return {c.mass * boost::math::ibeta(nd + 1.0, c.shape, c.prob),
              c.mass * c.shape * odds * boost::math::ibeta(nd, c.shape + 1.0, c.prob)};
    }
  }
  return {0.0, 0.0};
}

}  // namespace

double OffspringLaw::mean() const {
  double m = 0.0;
  for (std::size_t n = 2; n < pmf.size(); ++n) m += static_cast<double>(n) * pmf[n];
  return tail_corrected ? m + tail_mean : m;
}

double OffspringLaw::generating_function(double r) const {
  double s = 0.0;
  double rn = r * r;
  for (std::size_t n = 2; n < pmf.size(); ++n) {
    s += pmf[n] * rn;
    rn *= r;
  }
  return s;
}

double branch_rate(const BranchingMechanism& mech, const LambdaStar& lstar) {
  return mech.derivative(lstar.value);
}

double generator_f(const BranchingMechanism& mech, const LambdaStar& lstar, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("generator_f: r must lie in [0, 1]");
  return mech(lstar.value * (1.0 - r)) / lstar.value;
}

OffspringLaw offspring_pmf(const BranchingMechanism& mech, const LambdaStar& lstar, int n_max,
                           double delta_tail, TailPolicy policy) {
  if (n_max < 2) throw std::invalid_argument("offspring_pmf: n_max must be >= 2");
  const double limit = policy == TailPolicy::Certified ? 1e-6 : 1.0;
  if (!(delta_tail > 0.0 && delta_tail <= limit && delta_tail < 1.0)) {
    throw std::invalid_argument("offspring_pmf: delta_tail out of range");
  }
  const double ls = lstar.value;

  OffspringLaw law;
  law.q = lstar.psi_prime_at;
  law.lstar = ls;
  law.tail_corrected = policy == TailPolicy::Certified;

  if (mech.beta() > 0.0) {
    const double m = mech.beta() * ls * ls;
    law.components.push_back({Kind::Quadratic, m, m, 0.0, 0.0, 0.0, 0.0, 0.0});
  }
  for (const auto& a : mech.pi().atoms()) {
    const double mu = ls * a.location;
    law.components.push_back({Kind::Atom, a.weight, a.weight * special::poisson_at_least2(mu),
                              a.location, 0.0, 0.0, 0.0, mu});
  }
  for (const auto& g : mech.pi().gamma_components()) {
    const double r = g.shape + 1.0;
    const double mass = g.coefficient * std::exp(std::lgamma(r) - r * std::log(g.rate));
    const double p = ls / (g.rate + ls);
    law.components.push_back({Kind::Gamma, mass, mass * special::negbin_at_least2(r, p), 0.0, r,
                              p, g.rate + ls, 0.0});
  }
  double w = 0.0;
  for (const auto& c : law.components) w += c.weight;
  law.normalizer = w;
  for (const auto& c : law.components) law.component_weights.push_back(c.weight / w);

  law.pmf.assign(3, 0.0);
  double tail = 1.0;
  double tail_mean = 0.0;
  long n = 2;
  for (;; ++n) {
    double pn = 0.0;
    for (const auto& c : law.components) pn += component_pmf(c, n);
    if (n >= static_cast<long>(law.pmf.size())) law.pmf.push_back(0.0);
    law.pmf[n] = pn / w;
    tail = 0.0;
    tail_mean = 0.0;
    for (const auto& c : law.components) {
      const auto [t, tm] = component_tail(c, n);
      tail += t;
      tail_mean += tm;
    }
    tail /= w;
    tail_mean /= w;
    if (tail <= delta_tail || n >= n_max) break;
  }
  if (tail > delta_tail) {
    throw TruncationError("offspring_pmf: tail mass " + std::to_string(tail) +
                              " exceeds requested " + std::to_string(delta_tail) + " at n_max",
                          tail);
  }
  law.tail_mass = tail;
  law.tail_mean = tail_mean;
  return law;
}

long sample_poisson_at_least2(double mu, Rng& rng) {
  if (!(mu > 0.0)) throw std::invalid_argument("sample_poisson_at_least2: mu must be > 0");
  if (mu < 30.0) {
    const double u = uniform_open(rng);
    double c = std::exp(special::log_poisson_pmf(2, mu)) / special::poisson_at_least2(mu);
    double cum = c;
    long n = 2;
    while (cum < u && n < 100000) {
      c *= mu / static_cast<double>(n + 1);
      cum += c;
      ++n;
      if (c == 0.0) break;
    }
    return n;
  }
  std::poisson_distribution<long> pois(mu);
  for (long i = 0; i < 1'000'000; ++i) {
    const long n = pois(rng);
    if (n >= 2) return n;
  }
  throw SamplerDegenerateError("sample_poisson_at_least2: rejection budget exhausted");
}

long sample_negbin_at_least2(double r, double p, Rng& rng) {
  if (!(r > 0.0) || !(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("sample_negbin_at_least2: need r > 0 and p in (0, 1)");
  }
  const double mean = r * p / (1.0 - p);
  if (mean < 30.0) {
    const double u = uniform_open(rng);
    double c = std::exp(special::log_negbin_pmf(2, r, p)) / special::negbin_at_least2(r, p);
    double cum = c;
    long n = 2;
    while (cum < u && n < 1000000) {
      c *= p * (static_cast<double>(n) + r) / static_cast<double>(n + 1);
      cum += c;
      ++n;
      if (c == 0.0) break;
    }
    return n;
  }
  // gamma-mixed Poisson representation
  std::gamma_distribution<double> rate(r, p / (1.0 - p));
  for (long i = 0; i < 1'000'000; ++i) {
    std::poisson_distribution<long> pois(rate(rng));
    const long n = pois(rng);
    if (n >= 2) return n;
  }
  throw SamplerDegenerateError("sample_negbin_at_least2: rejection budget exhausted");
}

BranchEvent sample_branch_event(const OffspringLaw& law, Rng& rng) {
  const double u = uniform_open(rng);
  std::size_t i = 0;
  double cum = law.component_weights[0];
  while (cum < u && i + 1 < law.components.size()) cum += law.component_weights[++i];
  const OffspringComponent& c = law.components[i];
  switch (c.kind) {
    case Kind::Quadratic:
      return {2, 0.0};
    case Kind::Atom:
      return {sample_poisson_at_least2(c.mean_mu, rng), c.location};
    case Kind::Gamma: {
      const long n = sample_negbin_at_least2(c.shape, c.prob, rng);
      std::gamma_distribution<double> mark(static_cast<double>(n) + c.shape, 1.0 / c.rate);
      return {n, mark(rng)};
    }
  }
  return {2, 0.0};
}

double mean_identity_residual(const OffspringLaw& law, double alpha) {
  return law.q * (law.mean() - 1.0) - alpha;
}

OffspringLogMoment offspring_log_moment(const OffspringLaw& law, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("offspring_log_moment: eps must be > 0");
  const double power = 2.0 + eps;
  auto weight = [&](long n) {
    const double nd = static_cast<double>(n);
    return nd * std::pow(std::log(nd), power);
  };
  OffspringLogMoment out;
  out.partial_sums.assign(law.pmf.size(), 0.0);
  double s = 0.0;
  for (std::size_t n = 2; n < law.pmf.size(); ++n) {
    s += weight(static_cast<long>(n)) * law.pmf[n];
    out.partial_sums[n] = s;
  }
  double tail = 0.0;
  for (long n = law.n_max() + 1; n < law.n_max() + 1'000'000; ++n) {
    double pn = 0.0;
    for (const auto& c : law.components) pn += component_pmf(c, n);
    const double term = weight(n) * pn / law.normalizer;
    tail += term;
    if (term <= 1e-18 * (s + tail) && n > 2 * law.n_max()) break;
  }
  out.tail = tail;
  out.value = s + tail;
  return out;
}

}  // namespace backbone
