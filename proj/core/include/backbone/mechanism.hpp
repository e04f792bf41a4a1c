#pragma once

// Branching mechanisms of the form
//
//   psi(l) = -alpha l + beta l^2 + ∫ (e^{-l x} - 1 + l x) Pi(dx),
//
// with Pi a finite mixture of point atoms and gamma densities c x^k e^{-b x},
// so that every integral against Pi has a closed form.

#include <vector>

#include "backbone/mechanism_curve.hpp"

namespace backbone {

struct Atom {
  double location;  // x > 0
  double weight;    // w > 0
};

/// Density c x^k e^{-b x} on (0, ∞).
struct GammaComponent {
  double coefficient;  // c > 0
  int shape;           // k >= 0
  double rate;         // b > 0
};

class JumpMeasure {
 public:
  JumpMeasure() = default;
  JumpMeasure(std::vector<Atom> atoms, std::vector<GammaComponent> gamma_components);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<GammaComponent>& gamma_components() const noexcept { return gammas_; }
  bool empty() const noexcept { return atoms_.empty() && gammas_.empty(); }

  double total_mass() const;
  /// ∫ (x ∧ x²) Pi(dx); finite for every supported component.
  double truncated_moment() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<GammaComponent> gammas_;
};

class BranchingMechanism {
 public:
  /// Throws std::invalid_argument unless alpha > 0, beta >= 0 and beta > 0 when
  /// Pi is empty.
  BranchingMechanism(double alpha, double beta, JumpMeasure pi = {});

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  const JumpMeasure& pi() const noexcept { return pi_; }

  // Unchecked evaluation for lambda > -min(rate); eval_psi validates.
  double operator()(double lambda) const;
  double derivative(double lambda) const;
  double second_derivative(double lambda) const;
  /// ∫_0^xi psi(u) du.
  double integral(double xi) const;

 private:
  double alpha_;
  double beta_;
  JumpMeasure pi_;
};

double eval_psi(const BranchingMechanism& mech, double lambda);

struct LambdaStar {
  double value;         // largest root of psi
  double psi_prime_at;  // psi'(value) > 0
};

/// Doubling from alpha/(beta+1) until psi > 0, then bisection. Throws
/// NoRootError after 1000 doublings.
LambdaStar find_lambda_star(const BranchingMechanism& mech);

/// psi*(u) = psi(u + lambda*), evaluated without cancellation near u = 0 by
/// expanding around the root. Valid for u >= -lambda*.
class ShiftedMechanism {
 public:
  ShiftedMechanism(BranchingMechanism mech, LambdaStar lstar);

  double operator()(double u) const;
  double derivative(double u) const { return mech_.derivative(lstar_.value + u); }
  double second_derivative(double u) const { return mech_.second_derivative(lstar_.value + u); }

  const LambdaStar& lambda_star() const noexcept { return lstar_; }
  const BranchingMechanism& base() const noexcept { return mech_; }

 private:
  BranchingMechanism mech_;
  LambdaStar lstar_;
};

ShiftedMechanism shift_mechanism(const BranchingMechanism& mech, const LambdaStar& lstar);

enum class A3Verdict { Finite, Infinite, Inconclusive };

const char* to_string(A3Verdict v);

struct A3Diagnostic {
  A3Verdict verdict;
  double integral;            // ∫_{2 lambda*}^{cutoff} dξ / sqrt(∫_{lambda*}^ξ psi)
  double fitted_exponent;     // least-squares decay exponent of the integrand, last two decades
  double endpoint_exponent;   // local exponent at the cutoff
  double exponent_trend;      // endpoint minus local exponent two decades earlier
  double cutoff;
  bool late_onset;            // Finite, but the two-decade fit still looks like ξ^{-1}
};

A3Diagnostic check_condition_a3(const BranchingMechanism& mech, const LambdaStar& lstar,
                                double cutoff = 1e8);

struct LogMoment {
  double value;  // ∫_{[1,∞)} x (log x)^{2+eps} Pi(dx)
  bool finite;
};

LogMoment check_log_moment(const BranchingMechanism& mech, double eps);

/// u_t(theta) for du/dt = -psi(u), u_0 = theta (adaptive RK, rel tol 1e-9).
double csbp_laplace(const BranchingMechanism& mech, double t, double theta);
double csbp_laplace(const MechanismCurve& curve, double t, double theta);

/// exp(-lambda* ||mu||).
double extinction_probability(const LambdaStar& lstar, double total_mass);

}  // namespace backbone
