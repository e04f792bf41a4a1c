#pragma once

// Absorbed mass at the barrier -z for the critical-speed backbone. The number
// of particles absorbed at depth z is a continuous-time Galton-Watson process
// in z with branching generator F_D(s) = psi_D(lambda*(1-s))/lambda*; its
// generating function F_z(s) is evolved here together with the first two
// s-derivatives.

#include <functional>
#include <vector>

#include "backbone/bbm_sim.hpp"
#include "backbone/mechanism_curve.hpp"

namespace backbone {

/// F_D and its s-derivatives, parametrised by g = 1 - s so that the region
/// s -> 1 is evaluated without cancellation.
struct ExitGenerator {
  double lambda_star = 1.0;
  std::function<double(double)> value;      // F_D(1-g)
  std::function<double(double)> slope;      // F_D'(1-g)
  std::function<double(double)> curvature;  // F_D''(1-g)

  static ExitGenerator from_curve(const MechanismCurve& psi_d);
};

struct GenFnCurve {
  double z = 0.0;
  std::vector<double> s_grid;
  std::vector<double> F;
  std::vector<double> F1;
  std::vector<double> F2;
  std::vector<double> defect;  // 1 - F_z(s), evolved directly
};

struct GenFnPoint {
  double F;
  double defect;
  double F1;
  double F2;
};

/// Evolves one point of the flow with F_0 = 1 - g0 (so g0 = 1 - s).
GenFnPoint evolve_point(const ExitGenerator& gen, double z, double g0);

GenFnCurve evolve_gen_fn(const ExitGenerator& gen, double z, const std::vector<double>& s_grid);

/// u_z(theta) for du/dz = -psi_D(u).
std::vector<double> evolve_laplace_exponent(const MechanismCurve& psi_d, double z,
                                            const std::vector<double>& theta_grid);

/// max over s of |u_z(lambda* s) - lambda* (1 - F_z(1-s))|.
double poissonization_residual(const MechanismCurve& psi_d, const ExitGenerator& gen, double z,
                               const std::vector<double>& s_grid);

struct TailProbe {
  double z;
  double alpha;
  std::vector<double> s;
  std::vector<double> F1;      // F_z'(1-s)
  std::vector<double> F2;      // F_z''(1-s)
  std::vector<double> ratios;  // F2 s log²(1/s) / (sqrt(2 alpha) z e^{z sqrt(2 alpha)})
  std::vector<double> slope_ratios;  // F1 / e^{z sqrt(2 alpha)}
};

/// Throws PrecisionLimitError for s < 1e-9.
TailProbe tail_ratio(const ExitGenerator& gen, double alpha, double z,
                     const std::vector<double>& s_values);

struct TailPoint {
  long n;
  double p_hat;  // P(count > n)
  double ci_low;
  double ci_high;
  double prediction;  // sqrt(2a)(x+z)e^{sqrt(2a)(x+z)} / (n log² n), NaN for n <= 1
};

/// Censored counts are treated as exceeding every threshold.
std::vector<TailPoint> empirical_tail(const std::vector<ExitCount>& counts,
                                      const std::vector<long>& thresholds, double alpha,
                                      double x_plus_z);

struct PgfEstimate {
  double mean;
  double std_error;
};

/// Sample mean of s^count.
PgfEstimate empirical_pgf(const std::vector<ExitCount>& counts, double s);

/// sqrt(2 alpha)(x+z) e^{(x+z) sqrt(2 alpha)} / (t log² t); t must exceed 1.
double absorbed_tail_prediction(double alpha, double x, double z, double t);

}  // namespace backbone
