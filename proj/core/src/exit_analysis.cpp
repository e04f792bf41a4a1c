#include "backbone/exit_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "backbone/errors.hpp"
#include "backbone/mechanism.hpp"
#include "backbone/ode.hpp"
#include "backbone/stats.hpp"

namespace backbone {

ExitGenerator ExitGenerator::from_curve(const MechanismCurve& psi_d) {
  ExitGenerator g;
  const double ls = psi_d.lambda_star();
  g.lambda_star = ls;
  g.value = [psi_d, ls](double x) { return psi_d(ls * x) / ls; };
  g.slope = [psi_d, ls](double x) { return -psi_d.derivative(ls * x); };
  g.curvature = [psi_d, ls](double x) { return ls * psi_d.second_derivative(ls * x); };
  return g;
}

GenFnPoint evolve_point(const ExitGenerator& gen, double z, double g0) {
  if (!(z >= 0.0) || !std::isfinite(z)) throw std::invalid_argument("evolve_point: z must be >= 0");
  if (!(g0 >= 0.0 && g0 <= 1.0)) throw std::invalid_argument("evolve_point: s must lie in [0, 1]");
  constexpr double kSlack = 1e-9;

  // chart: defect g = 1 - F while g < 1/2, F itself afterwards
  bool defect_chart = g0 < 0.5;
  ode::State<3> y{defect_chart ? g0 : 1.0 - g0, 1.0, 0.0};
  double at = 0.0;

  ode::Options<3> opts;
  opts.rtol = 1e-11;
  opts.atol = {1e-300, 1e-20, 1e-20};
  opts.initial_step = 1e-4;

  auto rhs_defect = [&gen](double, const ode::State<3>& u) {
    const double g = std::clamp(u[0], 0.0, 1.0);
    const double d1 = gen.slope(g);
    return ode::State<3>{-gen.value(g), d1 * u[1], gen.curvature(g) * u[1] * u[1] + d1 * u[2]};
  };
  auto rhs_value = [&gen](double, const ode::State<3>& u) {
    const double g = std::clamp(1.0 - u[0], 0.0, 1.0);
    const double d1 = gen.slope(g);
    return ode::State<3>{gen.value(g), d1 * u[1], gen.curvature(g) * u[1] * u[1] + d1 * u[2]};
  };

  for (int pass = 0; pass < 64 && at < z; ++pass) {
    ode::DormandPrince45<3> solver(opts);
    bool switch_chart = false;
    auto watch = [&](double, const ode::State<3>& u) {
      const double g = defect_chart ? u[0] : 1.0 - u[0];
      switch_chart = defect_chart ? g > 0.5 : g < 0.5;
      return !switch_chart;
    };
    at = defect_chart ? solver.integrate(rhs_defect, at, y, z, watch)
                      : solver.integrate(rhs_value, at, y, z, watch);
    if (switch_chart) {
      y[0] = 1.0 - y[0];
      defect_chart = !defect_chart;
    }
  }
  const double g = defect_chart ? y[0] : 1.0 - y[0];
  const double F = defect_chart ? 1.0 - y[0] : y[0];
  if (g < -kSlack || F < -kSlack || !std::isfinite(y[1]) || !std::isfinite(y[2])) {
    throw NumericError("evolve_point: F left [0, 1]");
  }
  return {std::clamp(F, 0.0, 1.0), std::clamp(g, 0.0, 1.0), y[1], y[2]};
}

GenFnCurve evolve_gen_fn(const ExitGenerator& gen, double z, const std::vector<double>& s_grid) {
  GenFnCurve c;
  c.z = z;
  c.s_grid = s_grid;
  for (double s : s_grid) {
    const GenFnPoint p = evolve_point(gen, z, 1.0 - s);
    c.F.push_back(p.F);
    c.F1.push_back(p.F1);
    c.F2.push_back(p.F2);
    c.defect.push_back(p.defect);
  }
  return c;
}

std::vector<double> evolve_laplace_exponent(const MechanismCurve& psi_d, double z,
                                            const std::vector<double>& theta_grid) {
  std::vector<double> out;
  out.reserve(theta_grid.size());
  for (double th : theta_grid) out.push_back(csbp_laplace(psi_d, z, th));
  return out;
}

double poissonization_residual(const MechanismCurve& psi_d, const ExitGenerator& gen, double z,
                               const std::vector<double>& s_grid) {
  const double ls = psi_d.lambda_star();
  double worst = 0.0;
  for (double s : s_grid) {
    const double u = csbp_laplace(psi_d, z, ls * s);
    const double rhs = ls * evolve_point(gen, z, s).defect;
    worst = std::max(worst, std::abs(u - rhs));
  }
  return worst;
}

TailProbe tail_ratio(const ExitGenerator& gen, double alpha, double z,
                     const std::vector<double>& s_values) {
  if (!(z > 0.0)) throw std::invalid_argument("tail_ratio: z must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("tail_ratio: alpha must be positive");
  const double c = std::sqrt(2.0 * alpha);
  const double scale = c * z * std::exp(z * c);
  TailProbe t{z, alpha, {}, {}, {}, {}, {}};
  for (double s : s_values) {
    if (!(s < 1.0)) throw std::invalid_argument("tail_ratio: s must be below 1");
    if (s < 1e-9) throw PrecisionLimitError("tail_ratio: s below 1e-9 is beyond the evolved accuracy");
    const GenFnPoint p = evolve_point(gen, z, s);
    const double l = std::log(1.0 / s);
    t.s.push_back(s);
    t.F1.push_back(p.F1);
    t.F2.push_back(p.F2);
    t.ratios.push_back(p.F2 * s * l * l / scale);
    t.slope_ratios.push_back(p.F1 / std::exp(z * c));
  }
  return t;
}

std::vector<TailPoint> empirical_tail(const std::vector<ExitCount>& counts,
                                      const std::vector<long>& thresholds, double alpha,
                                      double x_plus_z) {
  if (counts.empty()) throw std::invalid_argument("empirical_tail: empty tally");
  const bool all_censored =
      std::all_of(counts.begin(), counts.end(), [](const ExitCount& c) { return c.censored; });
  if (all_censored) throw std::invalid_argument("empirical_tail: every count is censored");
  const double c = std::sqrt(2.0 * alpha);
  std::vector<TailPoint> out;
  for (long n : thresholds) {
    std::size_t above = 0;
    for (const auto& e : counts) above += (e.censored || e.count > n) ? 1 : 0;
    const auto ci = stats::wilson(above, counts.size());
    double pred = std::numeric_limits<double>::quiet_NaN();
    if (n > 1) {
      const double l = std::log(static_cast<double>(n));
      pred = c * x_plus_z * std::exp(c * x_plus_z) / (static_cast<double>(n) * l * l);
    }
    out.push_back({n, static_cast<double>(above) / static_cast<double>(counts.size()), ci.low,
                   ci.high, pred});
  }
  return out;
}

PgfEstimate empirical_pgf(const std::vector<ExitCount>& counts, double s) {
  std::vector<double> xs;
  xs.reserve(counts.size());
  for (const auto& e : counts) xs.push_back(std::pow(s, static_cast<double>(e.count)));
  const auto ms = stats::mean_se(xs);
  return {ms.mean, ms.std_error};
}

double absorbed_tail_prediction(double alpha, double x, double z, double t) {
  if (!(t > 1.0)) throw std::invalid_argument("absorbed_tail_prediction: t must exceed 1");
  const double c = std::sqrt(2.0 * alpha);
  const double l = std::log(t);
  return c * (x + z) * std::exp((x + z) * c) / (t * l * l);
}

}  // namespace backbone
