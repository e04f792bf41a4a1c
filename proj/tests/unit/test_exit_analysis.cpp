#include <gtest/gtest.h>

#include <cmath>

#include "backbone/errors.hpp"
#include "backbone/exit_analysis.hpp"
#include "backbone/waves.hpp"
#include "oracles.hpp"

using namespace backbone;

namespace {

double az_psi_d(double l) { return -(2.0 / std::sqrt(3.0)) * (l - std::pow(l, 1.5)); }

const MechanismCurve& az_curve() {
  static const MechanismCurve c = [] {
    const BranchingMechanism m(1.0, 1.0);
    return derive_psi_d(solve_psi_wave(m, find_lambda_star(m), 5.0 / (2.0 * std::sqrt(3.0))), m);
  }();
  return c;
}

const MechanismCurve& critical_curve() {
  static const MechanismCurve c = [] {
    const BranchingMechanism m(0.5, 0.5);
    return derive_psi_d(solve_psi_wave(m, find_lambda_star(m), 1.0), m);
  }();
  return c;
}

}  // namespace

TEST(ExitFlow, AgreesWithRk4OnClosedForm) {
  // dF/dz = F_D(F) with F_D(s) = psi_D(1 - s), psi_D known exactly
  const auto gen = ExitGenerator::from_curve(az_curve());
  for (double s : {0.0, 0.3, 0.8, 0.99}) {
    for (double z : {0.5, 2.0}) {
      auto f = [](double, const oracle::Vec<1>& y) {
        return oracle::Vec<1>{az_psi_d(std::clamp(1.0 - y[0], 0.0, 1.0))};
      };
      const double ref = oracle::rk4<1>(f, 0.0, {s}, z, 20000)[0];
      EXPECT_NEAR(evolve_point(gen, z, 1.0 - s).F, ref, 1e-9) << s << " " << z;
    }
  }
}

TEST(ExitFlow, IdentityAtZeroAndFixedPoint) {
  const auto gen = ExitGenerator::from_curve(az_curve());
  const auto p = evolve_point(gen, 0.0, 0.37);
  EXPECT_NEAR(p.F, 0.63, 1e-15);
  EXPECT_EQ(p.F1, 1.0);
  EXPECT_EQ(p.F2, 0.0);
  EXPECT_NEAR(evolve_point(gen, 3.0, 0.0).F, 1.0, 1e-15);
}

TEST(ExitFlow, PgfIsMonotoneAndConvexInS) {
  const auto gen = ExitGenerator::from_curve(critical_curve());
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  const auto c = evolve_gen_fn(gen, 1.0, grid);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_GE(c.F[i], c.F[i - 1]);
    EXPECT_GE(c.F1[i], 0.0);
    EXPECT_GE(c.F2[i], 0.0);
  }
  EXPECT_NEAR(c.F.back(), 1.0, 1e-14);
}

TEST(ExitFlow, DerivativesAgainstDifferences) {
  const auto gen = ExitGenerator::from_curve(critical_curve());
  const double h = 1e-5;
  for (double s : {0.2, 0.6}) {
    const auto p = evolve_point(gen, 1.0, 1.0 - s);
    const double fp = evolve_point(gen, 1.0, 1.0 - s - h).F;
    const double fm = evolve_point(gen, 1.0, 1.0 - s + h).F;
    EXPECT_NEAR(p.F1, (fp - fm) / (2 * h), 1e-6);
    EXPECT_NEAR(p.F2, (fp - 2 * p.F + fm) / (h * h), 1e-3);
  }
}

TEST(ExitFlow, SemigroupProperties) {
  for (const MechanismCurve* curve : {&az_curve(), &critical_curve()}) {
    const auto gen = ExitGenerator::from_curve(*curve);
    for (double s : {0.0, 0.25, 0.5, 0.75, 0.95}) {
      const double inner = evolve_point(gen, 0.8, 1.0 - s).F;
      EXPECT_NEAR(evolve_point(gen, 2.0, 1.0 - s).F, evolve_point(gen, 1.2, 1.0 - inner).F, 1e-9);
      const double th = curve->lambda_star() * s;
      EXPECT_NEAR(csbp_laplace(*curve, 2.0, th), csbp_laplace(*curve, 1.2, csbp_laplace(*curve, 0.8, th)), 1e-8);
    }
  }
}

TEST(ExitFlow, Poissonisation) {
  const auto gen = ExitGenerator::from_curve(az_curve());
  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back(i / 49.0);
  for (double z : {0.5, 1.0, 2.0}) EXPECT_LE(poissonization_residual(az_curve(), gen, z, grid), 1e-8);
}

TEST(ExitFlow, PerturbedMechanismBreaksPoissonisation) {
  const auto gen = ExitGenerator::from_curve(az_curve().scaled(1e-3));
  EXPECT_GT(poissonization_residual(az_curve(), gen, 1.0, {0.3, 0.6}), 1e-5);
}

TEST(TailProbe, RatiosApproachOne) {
  const auto gen = ExitGenerator::from_curve(critical_curve());
  const auto t = tail_ratio(gen, 0.5, 1.0, {1e-2, 1e-4, 1e-6, 1e-8});
  for (std::size_t i = 1; i < t.s.size(); ++i) {
    EXPECT_LT(std::abs(t.ratios[i] - 1.0), std::abs(t.ratios[i - 1] - 1.0));
    EXPECT_GT(t.slope_ratios[i], t.slope_ratios[i - 1]);
    EXPECT_LT(t.slope_ratios[i], 1.0);
  }
  EXPECT_THROW(tail_ratio(gen, 0.5, 1.0, {1e-10}), PrecisionLimitError);
  EXPECT_THROW(tail_ratio(gen, 0.5, 0.0, {1e-3}), std::invalid_argument);
}

TEST(EmpiricalTail, CountsAndCensoring) {
  std::vector<ExitCount> counts{{1, false}, {5, false}, {12, false}, {3, true}};
  const auto t = empirical_tail(counts, {4, 10}, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(t[0].p_hat, 0.75);  // 5, 12 and the censored one
  EXPECT_DOUBLE_EQ(t[1].p_hat, 0.5);
  EXPECT_NEAR(t[1].prediction, absorbed_tail_prediction(0.5, 0.0, 1.0, 10.0), 1e-15);
  EXPECT_THROW(empirical_tail({{2, true}}, {1}, 0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(absorbed_tail_prediction(0.5, 0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_NEAR(empirical_pgf({{0, false}, {2, false}}, 0.5).mean, 0.625, 1e-15);
}

TEST(EmpiricalTail, MonteCarloPgfMatchesFlow) {
  const BranchingMechanism m(0.5, 0.5);
  const auto ls = find_lambda_star(m);
  SimConfig c;
  c.law = offspring_pmf(m, ls, 8);
  c.rho = 1.0;
  c.x0 = 0.0;
  c.barrier = -1.0;
  const auto counts = sample_exit_mass(c, 100000, 42, 1);
  const auto gen = ExitGenerator::from_curve(critical_curve());
  for (double s : {0.25, 0.5, 0.75}) {
    const auto e = empirical_pgf(counts, s);
    EXPECT_NEAR(e.mean, evolve_point(gen, 1.0, 1.0 - s).F, 4 * e.std_error) << s;
  }
}
