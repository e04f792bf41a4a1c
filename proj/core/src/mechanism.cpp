#include "backbone/mechanism.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "backbone/errors.hpp"
#include "backbone/ode.hpp"
#include "backbone/special.hpp"

namespace backbone {

namespace {

// c Γ(k+1+extra) / b^{k+1+extra}
double gamma_moment(const GammaComponent& g, int extra, double rate) {
  const double order = g.shape + 1.0 + extra;
  return g.coefficient * std::exp(std::lgamma(order) - order * std::log(rate));
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

JumpMeasure::JumpMeasure(std::vector<Atom> atoms, std::vector<GammaComponent> gamma_components)
    : atoms_(std::move(atoms)), gammas_(std::move(gamma_components)) {
  for (const auto& a : atoms_) {
    if (!positive_finite(a.location) || !positive_finite(a.weight)) {
      throw std::invalid_argument("atom location and weight must be positive and finite");
    }
  }
  for (const auto& g : gammas_) {
    if (!positive_finite(g.coefficient) || !positive_finite(g.rate) || g.shape < 0) {
      throw std::invalid_argument("gamma component needs c > 0, integer k >= 0, b > 0");
    }
  }
}

double JumpMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight;
  for (const auto& g : gammas_) m += gamma_moment(g, 0, g.rate);
  return m;
}

double JumpMeasure::truncated_moment() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight * std::min(a.location, a.location * a.location);
  for (const auto& g : gammas_) {
    const double k = g.shape;
    // ∫_0^1 x^{k+2} e^{-bx} + ∫_1^∞ x^{k+1} e^{-bx}
    m += gamma_moment(g, 2, g.rate) * boost::math::gamma_p(k + 3.0, g.rate) +
         gamma_moment(g, 1, g.rate) * boost::math::gamma_q(k + 2.0, g.rate);
  }
  return m;
}

BranchingMechanism::BranchingMechanism(double alpha, double beta, JumpMeasure pi)
    : alpha_(alpha), beta_(beta), pi_(std::move(pi)) {
  if (!positive_finite(alpha_)) throw std::invalid_argument("alpha must be positive");
  if (!std::isfinite(beta_) || beta_ < 0.0) throw std::invalid_argument("beta must be >= 0");
  if (pi_.empty() && beta_ == 0.0) {
    throw std::invalid_argument("beta must be positive when the jump measure is empty");
  }
}

double BranchingMechanism::operator()(double lambda) const {
  double v = -alpha_ * lambda + beta_ * lambda * lambda;
  for (const auto& a : pi_.atoms()) v += a.weight * special::exp_remainder2(lambda * a.location);
  for (const auto& g : pi_.gamma_components()) {
    v += gamma_moment(g, 0, g.rate) *
         special::binomial_remainder(g.shape + 1.0, lambda / g.rate, 2);
  }
  return v;
}

double BranchingMechanism::derivative(double lambda) const {
  double v = -alpha_ + 2.0 * beta_ * lambda;
  for (const auto& a : pi_.atoms()) {
    v -= a.weight * a.location * std::expm1(-lambda * a.location);
  }
  for (const auto& g : pi_.gamma_components()) {
    v -= gamma_moment(g, 1, g.rate) *
         special::binomial_remainder(g.shape + 2.0, lambda / g.rate, 1);
  }
  return v;
}

double BranchingMechanism::second_derivative(double lambda) const {
  double v = 2.0 * beta_;
  for (const auto& a : pi_.atoms()) {
    v += a.weight * a.location * a.location * std::exp(-lambda * a.location);
  }
  for (const auto& g : pi_.gamma_components()) v += gamma_moment(g, 2, g.rate + lambda);
  return v;
}

double BranchingMechanism::integral(double xi) const {
  double v = -0.5 * alpha_ * xi * xi + beta_ * xi * xi * xi / 3.0;
  for (const auto& a : pi_.atoms()) {
    v += a.weight / a.location * special::exp_remainder3(xi * a.location);
  }
  for (const auto& g : pi_.gamma_components()) {
    const double t = xi / g.rate;
    if (g.shape == 0) {
      v += g.coefficient * special::log_remainder3(t);
    } else {
      // c Γ(k) b^{-k} [1 - (1+t)^{-k} - k t + k(k+1) t²/2]
      v -= gamma_moment(g, -1, g.rate) * special::binomial_remainder(g.shape, t, 3);
    }
  }
  return v;
}

double eval_psi(const BranchingMechanism& mech, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw std::invalid_argument("eval_psi: lambda must be finite and >= 0");
  }
  return mech(lambda);
}

LambdaStar find_lambda_star(const BranchingMechanism& mech) {
  double hi = mech.alpha() / (mech.beta() + 1.0);
  double lo = 0.0;
  int doublings = 0;
  while (!(mech(hi) > 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1000 || !std::isfinite(hi)) {
      throw NoRootError("find_lambda_star: no sign change after 1000 doublings");
    }
  }
  if (lo == 0.0) {
    // psi < 0 just to the right of 0 since psi'(0+) = -alpha
    lo = hi;
    for (int i = 0; i < 1100 && !(mech(lo) < 0.0); ++i) lo *= 0.5;
    if (!(mech(lo) < 0.0)) throw NoRootError("find_lambda_star: no negative lower bracket");
  }
  // bisect to the resolution of double precision (well below 1e-12 relative)
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mech(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double value = std::abs(mech(lo)) < std::abs(mech(hi)) ? lo : hi;
  return {value, mech.derivative(value)};
}

ShiftedMechanism::ShiftedMechanism(BranchingMechanism mech, LambdaStar lstar)
    : mech_(std::move(mech)), lstar_(lstar) {}

double ShiftedMechanism::operator()(double u) const {
  // psi(l*+u) - psi(l*) = u psi'(l*) + beta u² + ∫ e^{-l* x}(e^{-ux} - 1 + ux) Pi(dx)
  const double ls = lstar_.value;
  double v = u * lstar_.psi_prime_at + mech_.beta() * u * u;
  for (const auto& a : mech_.pi().atoms()) {
    v += a.weight * std::exp(-ls * a.location) * special::exp_remainder2(u * a.location);
  }
  for (const auto& g : mech_.pi().gamma_components()) {
    const double rate = g.rate + ls;
    v += gamma_moment(g, 0, rate) * special::binomial_remainder(g.shape + 1.0, u / rate, 2);
  }
  return v;
}

ShiftedMechanism shift_mechanism(const BranchingMechanism& mech, const LambdaStar& lstar) {
  return ShiftedMechanism(mech, lstar);
}

const char* to_string(A3Verdict v) {
  switch (v) {
    case A3Verdict::Finite:
      return "Finite";
    case A3Verdict::Infinite:
      return "Infinite";
    case A3Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

A3Diagnostic check_condition_a3(const BranchingMechanism& mech, const LambdaStar& lstar,
                                double cutoff) {
  const double ls = lstar.value;
  const double g_star = mech.integral(ls);
  auto G = [&](double xi) { return mech.integral(xi) - g_star; };
  const double xi0 = 2.0 * ls;
  if (!(cutoff > 100.0 * xi0)) {
    throw std::invalid_argument("check_condition_a3: cutoff too small");
  }

  auto integrand = [&](double t) {
    const double xi = std::exp(t);
    return xi / std::sqrt(G(xi));
  };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, std::log(xi0), std::log(cutoff), 20, 1e-11, &err);
  if (!std::isfinite(value) || err > 1e-6 * std::abs(value)) {
    throw NumericError("check_condition_a3: quadrature did not converge");
  }

  auto local_exponent = [&](double xi) { return -xi * mech(xi) / (2.0 * G(xi)); };

  // least squares of log(1/sqrt G) against log xi on [cutoff/100, cutoff]
  constexpr int kPoints = 41;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < kPoints; ++i) {
    const double lx = std::log(cutoff) - 2.0 * std::log(10.0) * (kPoints - 1 - i) / (kPoints - 1);
    const double ly = -0.5 * std::log(G(std::exp(lx)));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double fitted = (kPoints * sxy - sx * sy) / (kPoints * sxx - sx * sx);

  const double e_end = local_exponent(cutoff);
  const double trend = e_end - local_exponent(cutoff / 100.0);

  A3Diagnostic d{A3Verdict::Inconclusive, value, fitted, e_end, trend, cutoff, false};
  const double margin = -1.0 - e_end;
  if (margin > 1e-4 && trend < 0.5 * margin) {
    d.verdict = A3Verdict::Finite;
    d.late_onset = fitted > -1.05;
  } else if (e_end >= -1.0 - 1e-6) {
    d.verdict = A3Verdict::Infinite;
  }
  return d;
}

LogMoment check_log_moment(const BranchingMechanism& mech, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("check_log_moment: eps must be positive");
  }
  const double power = 2.0 + eps;
  double v = 0.0;
  for (const auto& a : mech.pi().atoms()) {
    if (a.location > 1.0) v += a.weight * a.location * std::pow(std::log(a.location), power);
  }
  boost::math::quadrature::exp_sinh<double> integrator;
  for (const auto& g : mech.pi().gamma_components()) {
    // substitute x = 1 + s
    auto f = [&](double s) {
      if (s <= 0.0) return 0.0;
      const double x = 1.0 + s;
      return g.coefficient * std::pow(x, g.shape + 1.0) * std::pow(std::log1p(s), power) *
             std::exp(-g.rate * x);
    };
    double err = 0.0;
    const double part = integrator.integrate(f, 1e-12, &err);
    if (!std::isfinite(part)) throw NumericError("check_log_moment: quadrature failed");
    v += part;
  }
  return {v, std::isfinite(v)};
}

namespace {

template <class Psi>
double csbp_flow(const Psi& psi, double t, double theta, double upper) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("csbp_laplace: t must be >= 0");
  if (t == 0.0 || theta == 0.0) return theta;
  ode::Options<1> opts;
  opts.rtol = 1e-9;
  opts.atol = {1e-300};
  opts.initial_step = 1e-4;
  ode::DormandPrince45<1> solver(opts);
  ode::State<1> y{theta};
  auto rhs = [&](double, const ode::State<1>& s) {
    return ode::State<1>{-psi(std::clamp(s[0], 0.0, upper))};
  };
  solver.integrate(rhs, 0.0, y, t);
  return std::clamp(y[0], 0.0, upper);
}

}  // namespace

double csbp_laplace(const BranchingMechanism& mech, double t, double theta) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("csbp_laplace: theta must be finite and >= 0");
  }
  const LambdaStar ls = find_lambda_star(mech);
  if (theta == ls.value) return theta;
  return csbp_flow(mech, t, theta, std::max(theta, ls.value));
}

double csbp_laplace(const MechanismCurve& curve, double t, double theta) {
  if (!(theta >= 0.0) || theta > curve.lambda_star()) {
    throw std::invalid_argument("csbp_laplace: theta must lie in [0, lambda*]");
  }
  return csbp_flow(curve, t, theta, curve.lambda_star());
}

double extinction_probability(const LambdaStar& lstar, double total_mass) {
  if (!(total_mass >= 0.0)) {
    throw std::invalid_argument("extinction_probability: mass must be >= 0");
  }
  return std::exp(-lstar.value * total_mass);
}

}  // namespace backbone
