// backbone: command-line front end for the mechanism, wave, simulation and
// exit-mass modules. Exit status: 0 success, 1 failed checks, 2 bad input.

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "backbone/backbone_law.hpp"
#include "backbone/bbm_sim.hpp"
#include "backbone/config.hpp"
#include "backbone/errors.hpp"
#include "backbone/exit_analysis.hpp"
#include "backbone/io.hpp"
#include "backbone/mechanism.hpp"
#include "backbone/verify.hpp"
#include "backbone/waves.hpp"

using namespace backbone;

namespace {

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = "-";
  std::string format = "csv";
  unsigned threads = 0;
};

void emit(const Globals& g, const io::Table& t) { io::write_text(g.out, t.render(io::parse_format(g.format))); }

ExperimentConfig experiment(const Globals& g, const char* kind, std::uint64_t replicas = 1) {
  ExperimentConfig ec;
  ec.mechanism_path = g.config;
  ec.kind = kind;
  ec.replicas = replicas;
  ec.seed = g.seed;
  ec.threads = g.threads;
  ec.out = g.out;
  ec.format = io::parse_format(g.format);
  ec.validate();
  return ec;
}

OffspringLaw law_for(const BranchingMechanism& mech, const LambdaStar& ls) {
  return offspring_pmf(mech, ls, 4096);
}

int cmd_mech(const Globals& g, bool pmf, double eps) {
  const auto mech = experiment(g, "mech").mechanism();
  const auto ls = find_lambda_star(mech);
  const auto law = law_for(mech, ls);
  if (pmf) {
    io::Table t({"n", "p_n"});
    for (int n = 2; n <= law.n_max(); ++n) t.add_row({static_cast<long long>(n), law.pmf[n]});
    emit(g, t);
    return 0;
  }
  const auto a3 = check_condition_a3(mech, ls);
  const auto lm = check_log_moment(mech, eps);
  io::Table t({"quantity", "value", "note"});
  t.add_row({std::string("lambda_star"), ls.value, std::string()});
  t.add_row({std::string("branch_rate"), ls.psi_prime_at, std::string("q = psi'(lambda*)")});
  t.add_row({std::string("offspring_mean"), law.mean(), std::string()});
  t.add_row({std::string("mean_identity_residual"), mean_identity_residual(law, mech.alpha()), std::string()});
  t.add_row({std::string("pmf_n_max"), static_cast<double>(law.n_max()), std::string()});
  t.add_row({std::string("pmf_tail_mass"), law.tail_mass, std::string()});
  t.add_row({std::string("a3_integral"), a3.integral, std::string(to_string(a3.verdict))});
  t.add_row({std::string("a3_fitted_exponent"), a3.fitted_exponent,
             std::string(a3.late_onset ? "late onset" : "")});
  t.add_row({std::string("log_moment"), lm.value, std::string(lm.finite ? "finite" : "infinite")});
  emit(g, t);
  return 0;
}

int cmd_wave(const Globals& g, const std::string& kind, double rho, bool emit_psi_d) {
  const auto mech = experiment(g, "wave").mechanism();
  const auto ls = find_lambda_star(mech);
  WaveProfile prof;
  if (kind == "phi") {
    const PhiResult r = solve_phi(mech, ls, rho);
    if (const auto* nw = std::get_if<NoWave>(&r)) {
      io::Table t({"outcome", "rho", "critical_speed", "reason"});
      t.add_row({std::string("no_wave"), nw->rho, nw->critical_speed, nw->reason});
      emit(g, t);
      return 0;
    }
    prof = std::get<WaveProfile>(r);
  } else if (kind == "psi" || kind == "theta") {
    prof = solve_psi_wave(mech, ls, rho);
    if (kind == "theta") prof = theta_from_psi(prof);
  } else {
    throw ConfigError("--kind must be phi, psi or theta");
  }
  if (emit_psi_d) {
    if (kind != "psi") throw ConfigError("--emit-psi-d needs --kind psi");
    const auto curve = derive_psi_d(prof, mech);
    io::Table t({"lambda", "psi_d", "slope", "curvature"});
    for (const auto& n : curve.nodes()) t.add_row({n.lambda, n.value, n.slope, n.curvature});
    emit(g, t);
    return 0;
  }
  io::Table t({"x", "value", "slope"});
  for (std::size_t i = 0; i < prof.size(); ++i) t.add_row({prof.grid[i], prof.values[i], prof.slopes[i]});
  emit(g, t);
  std::cerr << "residual " << io::format_double(ode_residual(prof, mech, rho)) << "\n";
  return 0;
}

int cmd_sim_speed(const Globals& g, double rho, double t, double x0, std::uint64_t n) {
  const auto mech = experiment(g, "simulation", n).mechanism();
  const auto ls = find_lambda_star(mech);
  SimConfig sc;
  sc.law = law_for(mech, ls);
  sc.rho = rho;
  sc.barrier = 0.0;
  sc.x0 = x0;
  const auto est = estimate_speed(sc, t, n, experiment_seed(g.seed, "sim-speed"), g.threads);
  io::Table tab({"rho", "t", "replicas", "survivors", "capped", "mean_speed", "std_error", "predicted"});
  tab.add_row({rho, t, static_cast<long long>(est.replicas), static_cast<long long>(est.survivors),
               static_cast<long long>(est.capped), est.mean, est.std_error,
               std::sqrt(2.0 * mech.alpha()) - rho});
  emit(g, tab);
  return 0;
}

int cmd_sim_extinction(const Globals& g, double rho, const std::vector<double>& xs, double t_max,
                       std::uint64_t n) {
  const auto mech = experiment(g, "simulation", n).mechanism();
  const auto ls = find_lambda_star(mech);
  const PhiResult wave = solve_phi(mech, ls, rho);
  const auto* prof = std::get_if<WaveProfile>(&wave);
  SimConfig sc;
  sc.law = law_for(mech, ls);
  sc.rho = rho;
  sc.barrier = 0.0;
  sc.t_max = t_max;
  io::Table tab({"x", "rho", "replicas", "extinct", "p_hat", "ci_low", "ci_high", "capped", "predicted"});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sc.x0 = xs[i];
    const auto e = estimate_extinction(sc, n, experiment_seed(g.seed, "sim-extinction", i), g.threads);
    const double pred = prof ? 1.0 - prof->value_at(xs[i]) / ls.value : 1.0;
    tab.add_row({xs[i], rho, static_cast<long long>(n), static_cast<long long>(e.extinct), e.p_hat,
                 e.ci_low, e.ci_high, static_cast<long long>(e.capped), pred});
  }
  emit(g, tab);
  return 0;
}

SimConfig exit_config(const BranchingMechanism& mech, const LambdaStar& ls, std::optional<double> rho,
                      double x, double z) {
  if (!(z > 0.0)) throw ConfigError("--z must be positive");
  SimConfig sc;
  sc.law = law_for(mech, ls);
  sc.rho = rho.value_or(std::sqrt(2.0 * mech.alpha()));
  sc.x0 = x;
  sc.barrier = -z;
  return sc;
}

int cmd_exit_mass(const Globals& g, std::optional<double> rho, double x, double z, std::uint64_t n) {
  const auto mech = experiment(g, "simulation", n).mechanism();
  const auto ls = find_lambda_star(mech);
  const auto counts =
      sample_exit_mass(exit_config(mech, ls, rho, x, z), n, experiment_seed(g.seed, "exit-mass"), g.threads);
  io::Table tab({"replica", "count", "censored"});
  for (std::size_t i = 0; i < counts.size(); ++i) {
    tab.add_row({static_cast<long long>(i), static_cast<long long>(counts[i].count), counts[i].censored});
  }
  emit(g, tab);
  return 0;
}

int cmd_exit_tail(const Globals& g, double z, const std::vector<double>& s_values, std::uint64_t mc,
                  const std::vector<long>& thresholds) {
  const auto mech = experiment(g, "exit-tail", std::max<std::uint64_t>(mc, 1)).mechanism();
  const auto ls = find_lambda_star(mech);
  const double crit = std::sqrt(2.0 * mech.alpha());
  if (mc > 0) {
    const auto counts = sample_exit_mass(exit_config(mech, ls, crit, 0.0, z), mc,
                                         experiment_seed(g.seed, "exit-tail"), g.threads);
    io::Table tab({"n", "p_hat", "ci_low", "ci_high", "prediction"});
    for (const auto& tp : empirical_tail(counts, thresholds, mech.alpha(), z)) {
      tab.add_row({static_cast<long long>(tp.n), tp.p_hat, tp.ci_low, tp.ci_high, tp.prediction});
    }
    emit(g, tab);
    return 0;
  }
  const auto curve = derive_psi_d(solve_psi_wave(mech, ls, crit), mech);
  const auto probe = tail_ratio(ExitGenerator::from_curve(curve), mech.alpha(), z, s_values);
  io::Table tab({"s", "F1", "F2", "tail_ratio", "slope_ratio"});
  for (std::size_t i = 0; i < probe.s.size(); ++i) {
    tab.add_row({probe.s[i], probe.F1[i], probe.F2[i], probe.ratios[i], probe.slope_ratios[i]});
  }
  emit(g, tab);
  return 0;
}

int cmd_verify(const Globals& g, bool quick, const std::vector<int>& criteria, unsigned concurrent) {
  VerifyConfig vc;
  vc.seed = g.seed;
  vc.threads = g.threads;
  vc.quick = quick;
  vc.criteria = criteria;
  vc.concurrent_checks = concurrent;
  if (!g.config.empty()) {
    vc.mechanism = experiment(g, "verify").mechanism();
  }
  vc.progress = &std::cerr;
  const auto report = run_verify_suite(vc);
  const auto fmt = io::parse_format(g.format);
  io::write_text(g.out, fmt == io::Format::Json ? report.to_json() : report.to_table().to_csv());
  std::cerr << report.to_text();
  return report.overall() == CheckStatus::Fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backbone decomposition toolkit: mechanisms, travelling waves, simulation, exit mass"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Mechanism JSON file (default: alpha = beta = 1)");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output path, - for stdout");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", g.threads, "Worker threads, 0 for all cores");

  auto* mech = app.add_subcommand("mech", "lambda*, branch rate, offspring law and condition checks");
  bool pmf = false;
  double eps = 0.5;
  mech->add_flag("--pmf", pmf, "Emit the offspring pmf instead of the summary");
  mech->add_option("--eps", eps, "Exponent excess for the log-moment check");

  auto* wave = app.add_subcommand("wave", "Travelling-wave profiles");
  std::string kind = "phi";
  double rho = 0.0;
  bool emit_psi_d = false;
  wave->add_option("--kind", kind, "phi, psi or theta")->check(CLI::IsMember({"phi", "psi", "theta"}));
  wave->add_option("--rho", rho, "Drift");
  wave->add_flag("--emit-psi-d", emit_psi_d, "Emit the exit mechanism tabulated from Psi");

  auto* speed = app.add_subcommand("sim-speed", "Monte Carlo right-most particle speed");
  double t = 10.0, x0 = 1.0;
  std::uint64_t n = 1000;
  speed->add_option("--rho", rho, "Drift");
  speed->add_option("--t", t, "Horizon");
  speed->add_option("--x0", x0, "Start above the killing barrier at 0");
  speed->add_option("--replicas", n, "Replicas");

  auto* ext = app.add_subcommand("sim-extinction", "Monte Carlo extinction frequency against the wave");
  std::vector<double> xs{1.0};
  double t_max = 20.0;
  ext->add_option("--rho", rho, "Drift");
  ext->add_option("--x", xs, "Starting positions")->delimiter(',');
  ext->add_option("--t-max", t_max, "Survival horizon");
  ext->add_option("--replicas", n, "Replicas per position");

  auto* mass = app.add_subcommand("exit-mass", "Particle counts absorbed at the barrier -z");
  std::optional<double> mass_rho;
  double x = 0.0, z = 1.0;
  mass->add_option("--rho", mass_rho, "Drift (default sqrt(2 alpha))");
  mass->add_option("--x", x, "Start");
  mass->add_option("--z", z, "Barrier depth");
  mass->add_option("--replicas", n, "Replicas");

  auto* tail = app.add_subcommand("exit-tail", "Tail ratio probes of the absorbed-count law");
  std::vector<double> s_values{1e-2, 1e-4, 1e-6, 1e-8};
  std::uint64_t mc = 0;
  std::vector<long> thresholds{10, 20, 50, 100, 200, 500, 1000};
  tail->add_option("--z", z, "Barrier depth");
  tail->add_option("--s", s_values, "Probe points")->delimiter(',');
  tail->add_option("--mc", mc, "Monte Carlo replicas; emits the empirical tail instead");
  tail->add_option("--thresholds", thresholds, "Count thresholds for --mc")->delimiter(',');

  auto* verify = app.add_subcommand("verify", "Run the verification suite");
  bool quick = false;
  std::vector<int> criteria;
  unsigned concurrent = 1;
  verify->add_flag("--quick", quick, "Reduced replica counts");
  verify->add_option("--criterion", criteria, "Only these criteria (repeatable)")->check(CLI::Range(1, 12));
  verify->add_option("--concurrent", concurrent, "Criteria evaluated at the same time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*mech) return cmd_mech(g, pmf, eps);
    if (*wave) return cmd_wave(g, kind, rho, emit_psi_d);
    if (*speed) return cmd_sim_speed(g, rho, t, x0, n);
    if (*ext) return cmd_sim_extinction(g, rho, xs, t_max, n);
    if (*mass) return cmd_exit_mass(g, mass_rho, x, z, n);
    if (*tail) return cmd_exit_tail(g, z, s_values, mc, thresholds);
    if (*verify) return cmd_verify(g, quick, criteria, concurrent);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
