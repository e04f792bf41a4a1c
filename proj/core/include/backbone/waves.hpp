#pragma once

// Travelling-wave ODEs attached to a branching mechanism psi and a drift rho:
//
//   Phi   : ½Φ″ − ρΦ′ − ψ(Φ) = 0 on x > 0,  Φ(0) = 0,  Φ(+∞) = λ*
//   Psi   : ½Ψ″ + ρΨ′ − ψ(Ψ) = 0 on ℝ,      Ψ(−∞) = λ*, Ψ(+∞) = 0
//   Theta : ½Θ″ − ρΘ′ + F(Θ) = 0 on ℝ,      Θ(x) = 1 − Ψ(−x)/λ*
//
// All profiles live on uniform grids so that residuals can be checked with
// centred differences.

#include <string>
#include <variant>
#include <vector>

#include "backbone/mechanism.hpp"
#include "backbone/mechanism_curve.hpp"

namespace backbone {

enum class WaveKind { Phi, Psi, Theta };

const char* to_string(WaveKind k);

struct WaveProfile {
  WaveKind kind = WaveKind::Phi;
  double rho = 0.0;
  double lambda_star = 0.0;
  std::vector<double> grid;  // uniform
  std::vector<double> values;
  std::vector<double> slopes;  // from the integrator state, not from differencing
  double boundary_low = 0.0;   // limit at the left end of the domain
  double boundary_high = 0.0;  // limit at the right end of the domain
  double slope_at_anchor = 0.0;
  double residual_sup = 0.0;

  std::size_t size() const { return grid.size(); }
  double step() const { return grid[1] - grid[0]; }
  /// Cubic Hermite interpolation (clamped to the end values outside the grid).
  double value_at(double x) const;
  double slope_at(double x) const;
  /// x with value_at(x) = v, for monotone profiles.
  double inverse(double v) const;
};

/// Outcome "no monotone wave exists at this speed".
struct NoWave {
  double rho;
  double critical_speed;  // sqrt(2 alpha)
  std::string reason;
};

using PhiResult = std::variant<WaveProfile, NoWave>;

struct WaveOptions {
  double tol = 1e-12;            // boundary defect required at the ends of the domain
  double grid_step = 0.01;
  double domain_length = 30.0;   // minimum half-width; extended up to 10x to meet tol
  double seed_defect = 1e-8;     // relative distance from lambda* where the saddle is seeded
};

/// Stable-manifold construction: integrate back from the saddle at lambda* to
/// the first zero of Phi. Returns NoWave when rho >= sqrt(2 alpha).
PhiResult solve_phi(const BranchingMechanism& mech, const LambdaStar& lstar, double rho,
                    const WaveOptions& opts = {});

struct ShootingOptions {
  bool skip_precheck = false;  // run the bracket search even when rho >= sqrt(2 alpha)
  double agree_tol = 1e-9;     // the returned profile stops where the brackets separate
  int max_expansions = 60;
};

/// Shooting on Phi'(0) with bisection between overshoot (Phi > lambda*) and
/// undershoot (Phi' < 0 below lambda*). The profile covers the region where the
/// final bracket trajectories agree, on a grid of step grid_step/2.
PhiResult solve_phi_shooting(const BranchingMechanism& mech, const LambdaStar& lstar, double rho,
                             const WaveOptions& opts = {}, const ShootingOptions& shoot = {});

/// Forward integration from the unstable manifold of the saddle at lambda*,
/// translated so that Psi(0) = lambda*/2.
WaveProfile solve_psi_wave(const BranchingMechanism& mech, const LambdaStar& lstar, double rho,
                           const WaveOptions& opts = {});

WaveProfile theta_from_psi(const WaveProfile& psi);

/// psi_D(lambda) = Psi'(Psi^{-1}(lambda)) tabulated at lambda_i = Psi(x_i). The
/// first two derivatives come from the phase-plane identities
/// psi_D psi_D' = Psi'' and the ODE itself, so `mech` must be the mechanism
/// the profile was solved for.
MechanismCurve derive_psi_d(const WaveProfile& psi, const BranchingMechanism& mech);

struct DecayFit {
  double rate;      // defect ~ constant * exp(-rate x)
  double constant;  // k_rho
  double x_lo;
  double x_hi;
  double r_squared;
};

/// Log-linear regression of the defect (lambda* - Phi, Psi or Theta) over the
/// grid points where it lies in [1e-6, 1e-3].
DecayFit fit_decay_rate(const WaveProfile& profile);

/// sup over interior grid points of the ODE residual, by 5-point differences.
double ode_residual(const WaveProfile& profile, const BranchingMechanism& mech, double rho);

/// sqrt(rho² + 2q) - rho, the decay rate of lambda* - Phi.
double phi_decay_rate(double rho, double q);

/// rho - sqrt(rho² - 2 alpha), the slow decay rate of Psi at +∞.
double psi_decay_rate(double rho, double alpha);

}  // namespace backbone
