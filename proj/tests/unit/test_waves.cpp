#include <gtest/gtest.h>

#include <cmath>
#include <variant>

#include "backbone/errors.hpp"
#include "backbone/waves.hpp"
#include "oracles.hpp"

using namespace backbone;

namespace {

const double kAzRho = 5.0 / (2.0 * std::sqrt(3.0));

double az_psi(double x) { return std::pow(1.0 + (std::sqrt(2.0) - 1.0) * std::exp(x / std::sqrt(3.0)), -2.0); }

WaveProfile phi(const BranchingMechanism& m, double rho) {
  const PhiResult r = solve_phi(m, find_lambda_star(m), rho);
  EXPECT_TRUE(std::holds_alternative<WaveProfile>(r));
  return std::get<WaveProfile>(r);
}

}  // namespace

TEST(Phi, SlopeAtZeroFromFirstIntegral) {
  // at rho = 0: Φ'(0)² = -4 ∫_0^λ* ψ
  for (const auto& m : {BranchingMechanism(1.0, 1.0),
                        BranchingMechanism(0.8, 0.2, JumpMeasure({{1.5, 0.6}}, {{0.3, 1, 2.0}}))}) {
    const auto ls = find_lambda_star(m);
    const double ref = std::sqrt(-4.0 * oracle::simpson([&](double u) { return m(u); }, 0.0, ls.value));
    const auto p = phi(m, 0.0);
    EXPECT_NEAR(p.slope_at_anchor, ref, 1e-8);
    EXPECT_NEAR(p.values.front(), 0.0, 1e-14);
  }
  EXPECT_NEAR(phi(BranchingMechanism(1.0, 1.0), 0.0).slope_at_anchor, std::sqrt(2.0 / 3.0), 1e-9);
}

TEST(Phi, AgreesWithIndependentRk4) {
  const BranchingMechanism m(1.0, 1.0);
  for (double rho : {0.0, 0.7, 1.2}) {
    const auto p = phi(m, rho);
    // Φ'' = 2(ψ(Φ) + ρΦ'), started from the profile's own anchor slope
    auto f = [&](double, const oracle::Vec<2>& y) { return oracle::Vec<2>{y[1], 2.0 * (m(y[0]) + rho * y[1])}; };
    oracle::Vec<2> y{0.0, p.slope_at_anchor};
    double x = 0.0;
    for (double x_end : {0.5, 1.0, 2.0, 3.0}) {
      y = oracle::rk4<2>(f, x, y, x_end, 4000);
      x = x_end;
      EXPECT_NEAR(y[0], p.value_at(x_end), 2e-7) << rho << " " << x_end;
    }
  }
}

TEST(Phi, MonotoneSmallResidualAndLimits) {
  const BranchingMechanism m(1.0, 1.0);
  for (double rho : {0.0, 0.5, 1.0, 1.4}) {
    const auto p = phi(m, rho);
    for (std::size_t i = 1; i < p.size(); ++i) ASSERT_GE(p.values[i], p.values[i - 1]);
    EXPECT_LE(ode_residual(p, m, rho), 1e-6);
    EXPECT_NEAR(p.values.back(), 1.0, 1e-10);
    EXPECT_NEAR(p.inverse(p.value_at(1.234)), 1.234, 1e-8);
  }
}

TEST(Phi, NoWaveAtAndAboveCriticalSpeed) {
  const BranchingMechanism m(1.0, 1.0);
  const auto ls = find_lambda_star(m);
  for (double rho : {std::sqrt(2.0), 1.5, 2.0}) {
    const PhiResult r = solve_phi(m, ls, rho);
    ASSERT_TRUE(std::holds_alternative<NoWave>(r));
    EXPECT_NEAR(std::get<NoWave>(r).critical_speed, std::sqrt(2.0), 1e-15);
    ShootingOptions forced;
    forced.skip_precheck = true;
    EXPECT_TRUE(std::holds_alternative<NoWave>(solve_phi_shooting(m, ls, rho, {}, forced)));
  }
}

TEST(Phi, ShootingAgreesWithManifold) {
  const BranchingMechanism m(1.0, 1.0);
  const auto ls = find_lambda_star(m);
  for (double rho : {0.0, 1.0}) {
    const auto a = phi(m, rho);
    const auto b = std::get<WaveProfile>(solve_phi_shooting(m, ls, rho));
    EXPECT_NEAR(a.slope_at_anchor, b.slope_at_anchor, 1e-8);
  }
}

TEST(Phi, DecayRate) {
  const BranchingMechanism m(1.0, 1.0);
  for (double rho : {0.0, 0.5, 1.0}) {
    const auto f = fit_decay_rate(phi(m, rho));
    EXPECT_NEAR(f.rate, std::sqrt(rho * rho + 2.0) - rho, 1e-3);
    EXPECT_GE(f.r_squared, 0.999);
  }
}

TEST(Phi, ShortDomainCannotBeFitted) {
  WaveProfile p;
  p.kind = WaveKind::Phi;
  p.lambda_star = 1.0;
  for (int i = 0; i < 50; ++i) {
    p.grid.push_back(0.01 * i);
    p.values.push_back(1.0 - std::exp(-0.01 * i));
    p.slopes.push_back(std::exp(-0.01 * i));
  }
  EXPECT_THROW(fit_decay_rate(p), DomainTooShortError);
}

TEST(Psi, ClosedFormWave) {
  const BranchingMechanism m(1.0, 1.0);
  const auto psi = solve_psi_wave(m, find_lambda_star(m), kAzRho);
  EXPECT_NEAR(psi.value_at(0.0), 0.5, 1e-14);
  double err = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) err = std::max(err, std::abs(psi.values[i] - az_psi(psi.grid[i])));
  EXPECT_LE(err, 1e-9);
  // slow decay branch at +∞; in the fit window the closed form still carries a
  // relative correction of order e^{-x/√3}, about 1%
  EXPECT_NEAR(fit_decay_rate(psi).rate, psi_decay_rate(kAzRho, 1.0), 1e-2);
}

TEST(Psi, RejectsSubcriticalSpeed) {
  const BranchingMechanism m(1.0, 1.0);
  EXPECT_THROW(solve_psi_wave(m, find_lambda_star(m), 1.0), std::invalid_argument);
}

TEST(Psi, CriticalSpeedProfile) {
  const BranchingMechanism m(1.0, 1.0);
  const auto psi = solve_psi_wave(m, find_lambda_star(m), std::sqrt(2.0));
  EXPECT_LE(ode_residual(psi, m, std::sqrt(2.0)), 1e-6);
  for (std::size_t i = 1; i < psi.size(); ++i) ASSERT_LE(psi.values[i], psi.values[i - 1]);
}

TEST(Theta, ReflectionOfPsi) {
  const BranchingMechanism m(1.0, 1.0);
  const auto psi = solve_psi_wave(m, find_lambda_star(m), kAzRho);
  const auto th = theta_from_psi(psi);
  for (double x : {-3.0, -0.5, 0.0, 2.0, 5.0}) EXPECT_NEAR(th.value_at(x), 1.0 - az_psi(-x), 1e-9);
  EXPECT_LE(ode_residual(th, m, kAzRho), 1e-6);
}

TEST(PsiD, ClosedFormExitMechanism) {
  const BranchingMechanism m(1.0, 1.0);
  const auto curve = derive_psi_d(solve_psi_wave(m, find_lambda_star(m), kAzRho), m);
  EXPECT_TRUE(curve.is_convex());
  EXPECT_NEAR(curve.lambda_star(), 1.0, 1e-14);
  for (double l = 0.01; l < 1.0; l += 0.01) {
    EXPECT_NEAR(curve(l), -(2 / std::sqrt(3.0)) * (l - std::pow(l, 1.5)), 1e-10);
    EXPECT_NEAR(curve.derivative(l), -(2 / std::sqrt(3.0)) * (1 - 1.5 * std::sqrt(l)), 1e-7);
  }
  EXPECT_NEAR(curve.derivative(1.0), 1.0 / std::sqrt(3.0), 1e-9);
}

TEST(DecayRates, Formulas) {
  EXPECT_NEAR(phi_decay_rate(0.0, 1.0), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(psi_decay_rate(std::sqrt(2.0), 1.0), std::sqrt(2.0), 1e-7);
}
