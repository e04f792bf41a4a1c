#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "backbone/errors.hpp"
#include "backbone/mechanism.hpp"
#include "oracles.hpp"

using namespace backbone;

namespace {

BranchingMechanism mixed() {
  return BranchingMechanism(1.2, 0.3, JumpMeasure({{0.7, 0.8}, {2.5, 0.2}}, {{0.6, 0, 1.5}, {0.4, 2, 2.0}}));
}

oracle::DirectPsi mixed_direct() {
  return {1.2, 0.3, {{0.7, 0.8}, {2.5, 0.2}}, {{0.6, 0, 1.5}, {0.4, 2, 2.0}}};
}

}  // namespace

TEST(Mechanism, QuadraticClosedForm) {
  const BranchingMechanism m(1.0, 1.0);
  for (double l : {0.0, 0.3, 1.0, 2.5}) {
    EXPECT_NEAR(m(l), l * l - l, 1e-15);
    EXPECT_NEAR(m.derivative(l), 2 * l - 1, 1e-15);
    EXPECT_NEAR(m.second_derivative(l), 2.0, 1e-15);
    EXPECT_NEAR(m.integral(l), l * l * l / 3 - l * l / 2, 1e-14);
  }
  const auto ls = find_lambda_star(m);
  EXPECT_NEAR(ls.value, 1.0, 1e-14);
  EXPECT_NEAR(ls.psi_prime_at, 1.0, 1e-13);
}

TEST(Mechanism, MatchesDirectQuadrature) {
  const auto m = mixed();
  const auto d = mixed_direct();
  for (double l : {0.05, 0.5, 1.0, 3.0, 7.0}) EXPECT_NEAR(m(l), d(l), 1e-9 * (1 + std::abs(d(l)))) << l;
}

TEST(Mechanism, DerivativesAgainstDifferences) {
  const auto m = mixed();
  for (double l : {0.1, 0.9, 2.0, 5.0}) {
    const double h = 1e-4;
    EXPECT_NEAR(m.derivative(l), (m(l + h) - m(l - h)) / (2 * h), 1e-7);
    EXPECT_NEAR(m.second_derivative(l), (m.derivative(l + h) - m.derivative(l - h)) / (2 * h), 1e-6);
  }
}

TEST(Mechanism, IntegralAgainstSimpson) {
  const auto m = mixed();
  for (double xi : {1e-3, 0.4, 2.0, 6.0}) {
    const double ref = oracle::simpson([&](double u) { return m(u); }, 0.0, xi);
    EXPECT_NEAR(m.integral(xi), ref, 1e-11 * (1 + std::abs(ref))) << xi;
  }
}

TEST(Mechanism, SmallLambdaKeepsRelativeAccuracy) {
  // psi(l) ~ -alpha l + (beta + ½∫x²Pi) l² as l -> 0
  const BranchingMechanism m(1.0, 0.0, JumpMeasure({{1.0, 2.0}}, {}));
  const double l = 1e-9;
  EXPECT_NEAR(m(l) / l, -1.0 + l, 1e-15);
}

TEST(Mechanism, LambdaStarAgainstBisection) {
  const BranchingMechanism atom(1.0, 0.0, JumpMeasure({{1.0, 2.0}}, {}));
  const double ref = oracle::bisect([](double l) { return l - 2 + 2 * std::exp(-l); }, 1.0, 2.0);
  EXPECT_NEAR(find_lambda_star(atom).value, ref, 1e-13);

  const auto d = mixed_direct();
  const double ref2 = oracle::bisect(d, 0.5, 20.0);
  EXPECT_NEAR(find_lambda_star(mixed()).value, ref2, 1e-9);
}

TEST(Mechanism, NoRootWhenPsiStaysNegative) {
  // psi(l) = -l + ∫(e^{-lx} - 1 + lx) e^{-x} dx = -l / (1 + l) never returns to zero
  const BranchingMechanism m(1.0, 0.0, JumpMeasure({}, {{1.0, 0, 1.0}}));
  EXPECT_THROW(find_lambda_star(m), NoRootError);
}

TEST(Mechanism, InvalidParametersThrow) {
  EXPECT_THROW(BranchingMechanism(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(BranchingMechanism(1.0, -0.1), std::invalid_argument);
  EXPECT_THROW(BranchingMechanism(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(JumpMeasure({{-1.0, 1.0}}, {}), std::invalid_argument);
  EXPECT_THROW(JumpMeasure({}, {{1.0, -1, 1.0}}), std::invalid_argument);
  EXPECT_THROW(eval_psi(BranchingMechanism(1.0, 1.0), std::nan("")), std::invalid_argument);
}

TEST(MechanismProperty, ConvexAndNormalised) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const BranchingMechanism m(u(rng), u(rng) - 0.1,
                               JumpMeasure({{u(rng), u(rng)}}, {{u(rng), trial % 4, u(rng)}}));
    EXPECT_EQ(m(0.0), 0.0);
    EXPECT_NEAR(m.derivative(0.0), -m.alpha(), 1e-12);
    for (double l = 0.0; l < 10.0; l += 0.37) EXPECT_GT(m.second_derivative(l), 0.0);
    const auto ls = find_lambda_star(m);
    EXPECT_LE(std::abs(m(ls.value)), 1e-12 * std::max(1.0, ls.value * ls.psi_prime_at));
    EXPECT_GT(ls.psi_prime_at, 0.0);
    EXPECT_LT(m(0.5 * ls.value), 0.0);
  }
}

TEST(ShiftedMechanism, AgreesAwayFromTheRoot) {
  const auto m = mixed();
  const auto ls = find_lambda_star(m);
  const auto s = shift_mechanism(m, ls);
  for (double u : {-0.5 * ls.value, 0.2, 1.0, 4.0}) EXPECT_NEAR(s(u), m(ls.value + u), 1e-12 * (1 + std::abs(m(ls.value + u))));
  // near the root: first-order behaviour without cancellation
  for (double u : {1e-10, -1e-10, 1e-7}) EXPECT_NEAR(s(u) / u, ls.psi_prime_at, 1e-6);
}

TEST(ConditionA3, Verdicts) {
  const BranchingMechanism quad(1.0, 1.0);
  const auto a = check_condition_a3(quad, find_lambda_star(quad));
  EXPECT_EQ(a.verdict, A3Verdict::Finite);
  EXPECT_NEAR(a.endpoint_exponent, -1.5, 1e-3);

  const BranchingMechanism atom(1.0, 0.0, JumpMeasure({{1.0, 2.0}}, {}));
  EXPECT_EQ(check_condition_a3(atom, find_lambda_star(atom)).verdict, A3Verdict::Infinite);

  const BranchingMechanism late(1.0, 1e-9, JumpMeasure({{1.0, 2.0}}, {}));
  const auto l = check_condition_a3(late, find_lambda_star(late));
  EXPECT_EQ(l.verdict, A3Verdict::Finite);
  EXPECT_TRUE(l.late_onset);
}

TEST(LogMoment, GammaDensityAgainstQuadrature) {
  // ∫_1^∞ x (log x)^{2.5} e^{-x} dx
  const BranchingMechanism m(1.0, 0.0, JumpMeasure({}, {{1.0, 0, 1.0}}));
  const double ref = oracle::simpson(
      [](double x) { return x * std::pow(std::log(x), 2.5) * std::exp(-x); }, 1.0, 60.0, 200000);
  const auto lm = check_log_moment(m, 0.5);
  EXPECT_TRUE(lm.finite);
  EXPECT_NEAR(lm.value, ref, 1e-8);
  EXPECT_NEAR(lm.value, 0.701960864161696, 1e-9);

  const BranchingMechanism atoms(1.0, 0.0, JumpMeasure({{0.5, 1.0}, {std::exp(1.0), 2.0}}, {}));
  EXPECT_NEAR(check_log_moment(atoms, 1.0).value, 2.0 * std::exp(1.0), 1e-12);
}

TEST(Csbp, LogisticClosedForm) {
  // du/dt = a u - b u², u_0 = theta
  const BranchingMechanism m(1.0, 1.0);
  for (double t : {0.1, 1.0, 5.0}) {
    for (double th : {0.1, 0.5, 3.0}) {
      const double e = std::exp(t);
      EXPECT_NEAR(csbp_laplace(m, t, th), th * e / (1 + th * (e - 1)), 1e-8) << t << " " << th;
    }
  }
  EXPECT_NEAR(csbp_laplace(m, 1.0, 0.5), 0.731058578587264, 1e-8);
  EXPECT_EQ(csbp_laplace(m, 0.0, 0.7), 0.7);
}

TEST(Csbp, ExtinctionProbability) {
  const LambdaStar ls{1.5, 1.0};
  EXPECT_NEAR(extinction_probability(ls, 2.0), std::exp(-3.0), 1e-15);
  EXPECT_EQ(extinction_probability(ls, 0.0), 1.0);
}
