#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "backbone/backbone_law.hpp"
#include "backbone/errors.hpp"
#include "backbone/stats.hpp"
#include "oracles.hpp"

using namespace backbone;

namespace {

// p_n = (beta l² 1{n=2} + ∫ (l x)^n / n! e^{-l x} Pi(dx)) / (l q), the gamma
// part by quadrature
double direct_pn(const oracle::DirectPsi& d, double l, double q, int n) {
  double v = n == 2 ? d.beta * l * l : 0.0;
  for (const auto& a : d.atoms) v += a[1] * std::exp(n * std::log(l * a[0]) - l * a[0] - std::lgamma(n + 1.0));
  for (const auto& g : d.gammas) {
    v += oracle::simpson(
        [&](double x) {
          if (x == 0.0) return 0.0;
          return std::exp(n * std::log(l * x) - l * x - std::lgamma(n + 1.0)) * g[0] * std::pow(x, g[1]) *
                 std::exp(-g[2] * x);
        },
        0.0, 80.0 / g[2], 40000);
  }
  return v / (l * q);
}

const oracle::DirectPsi kMixed{0.9, 0.4, {{1.3, 0.7}}, {{0.5, 1, 1.2}}};

BranchingMechanism mixed() {
  return BranchingMechanism(0.9, 0.4, JumpMeasure({{1.3, 0.7}}, {{0.5, 1, 1.2}}));
}

}  // namespace

TEST(OffspringLaw, QuadraticIsBinary) {
  const BranchingMechanism m(1.0, 1.0);
  const auto ls = find_lambda_star(m);
  const auto law = offspring_pmf(m, ls, 10);
  EXPECT_NEAR(law.pmf[2], 1.0, 1e-15);
  EXPECT_EQ(law.pmf[0], 0.0);
  EXPECT_EQ(law.pmf[1], 0.0);
  EXPECT_NEAR(law.mean(), 2.0, 1e-14);
}

TEST(OffspringLaw, MatchesDirectFormula) {
  const auto m = mixed();
  const auto ls = find_lambda_star(m);
  const auto law = offspring_pmf(m, ls, 400);
  for (int n = 2; n <= 12; ++n) EXPECT_NEAR(law.pmf[n], direct_pn(kMixed, ls.value, ls.psi_prime_at, n), 1e-10) << n;
}

TEST(OffspringLaw, GeneratorIdentity) {
  // q (Σ p_n r^n - r) = psi(l (1 - r)) / l
  const auto m = mixed();
  const auto ls = find_lambda_star(m);
  const auto law = offspring_pmf(m, ls, 400);
  for (double r : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    EXPECT_NEAR(law.q * (law.generating_function(r) - r), generator_f(m, ls, r), 1e-12) << r;
  }
  EXPECT_THROW(generator_f(m, ls, 1.5), std::invalid_argument);
}

TEST(OffspringLaw, MeanIdentityAcrossMechanisms) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 20; ++i) {
    const double alpha = u(rng);
    const BranchingMechanism m(alpha, u(rng), JumpMeasure({{u(rng), u(rng)}, {3 * u(rng), u(rng)}},
                                                         {{u(rng), i % 3, u(rng)}}));
    const auto ls = find_lambda_star(m);
    const auto law = offspring_pmf(m, ls, 4096);
    EXPECT_LE(std::abs(mean_identity_residual(law, alpha)) / alpha, 1e-12);
    double sum = law.tail_mass;
    for (double p : law.pmf) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(OffspringLaw, TruncationPolicies) {
  const BranchingMechanism atom(1.0, 0.0, JumpMeasure({{1.0, 2.0}}, {}));
  const auto ls = find_lambda_star(atom);
  EXPECT_THROW(offspring_pmf(atom, ls, 5), TruncationError);
  const auto t = offspring_pmf(atom, ls, 500, 1e-3, TailPolicy::Truncate);
  EXPECT_FALSE(t.tail_corrected);
  EXPECT_GT(t.tail_mass, 0.0);
  EXPECT_NEAR(mean_identity_residual(t, 1.0), -t.q * t.tail_mean, 1e-12);
  EXPECT_THROW(offspring_pmf(atom, ls, 500, 1e-3, TailPolicy::Certified), std::invalid_argument);
}

TEST(OffspringLaw, LogMoment) {
  const BranchingMechanism m(1.0, 1.0);
  const auto law = offspring_pmf(m, find_lambda_star(m), 10);
  const auto lm = offspring_log_moment(law, 0.5);
  EXPECT_NEAR(lm.value, 2.0 * std::pow(std::log(2.0), 2.5), 1e-14);
}

TEST(Sampler, OffspringCountsFollowPmf) {
  const auto m = mixed();
  const auto ls = find_lambda_star(m);
  const auto law = offspring_pmf(m, ls, 400);
  Rng rng(3);
  std::vector<long> hist(law.pmf.size(), 0);
  const int n = 200000;
  double y_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto ev = sample_branch_event(law, rng);
    ASSERT_GE(ev.n, 2);
    ASSERT_GE(ev.y, 0.0);
    y_sum += ev.y;
    if (static_cast<std::size_t>(ev.n) < hist.size()) ++hist[static_cast<std::size_t>(ev.n)];
  }
  const auto chi = stats::chi_square_gof(hist, law.pmf);
  EXPECT_GT(chi.p_value, 1e-3) << chi.statistic;

  // E[y] = (1/(l q)) (Σ w x e^{-l x}(e^{l x} - 1 - l x) + gamma terms), by quadrature
  const double l = ls.value;
  double ey = 0.0;
  for (const auto& a : kMixed.atoms) {
    ey += a[1] * a[0] * (1.0 - std::exp(-l * a[0]) - l * a[0] * std::exp(-l * a[0]));
  }
  for (const auto& g : kMixed.gammas) {
    ey += oracle::simpson(
        [&](double x) {
          return x * (1.0 - std::exp(-l * x) - l * x * std::exp(-l * x)) * g[0] * std::pow(x, g[1]) *
                 std::exp(-g[2] * x);
        },
        0.0, 80.0 / g[2], 40000);
  }
  ey /= l * ls.psi_prime_at;
  EXPECT_NEAR(y_sum / n, ey, 0.02 * ey);
}

TEST(Sampler, ConditionedPoisson) {
  for (double mu : {0.3, 4.0, 60.0}) {
    Rng rng(static_cast<std::uint64_t>(mu * 100));
    const int n = 100000;
    const int top = static_cast<int>(mu + 12 * std::sqrt(mu) + 20);
    std::vector<long> hist(static_cast<std::size_t>(top), 0);
    std::vector<double> probs(hist.size(), 0.0);
    const double norm = -std::expm1(-mu) - mu * std::exp(-mu);
    for (int k = 2; k < top; ++k) probs[k] = std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0)) / norm;
    for (int i = 0; i < n; ++i) {
      const long k = sample_poisson_at_least2(mu, rng);
      ASSERT_GE(k, 2);
      if (k < top) ++hist[static_cast<std::size_t>(k)];
    }
    EXPECT_GT(stats::chi_square_gof(hist, probs).p_value, 1e-3) << mu;
  }
}

TEST(Sampler, ConditionedNegativeBinomial) {
  for (auto [r, p] : {std::pair{1.0, 0.3}, std::pair{3.0, 0.6}, std::pair{2.0, 0.97}}) {
    Rng rng(static_cast<std::uint64_t>(r * 1000 + p * 100));
    const int n = 100000;
    const int top = 3000;
    std::vector<long> hist(top, 0);
    std::vector<double> probs(top, 0.0);
    auto pmf = [&](int k) {
      return std::exp(std::lgamma(k + r) - std::lgamma(r) - std::lgamma(k + 1.0) + r * std::log1p(-p) +
                      k * std::log(p));
    };
    const double norm = 1.0 - pmf(0) - pmf(1);
    for (int k = 2; k < top; ++k) probs[k] = pmf(k) / norm;
    for (int i = 0; i < n; ++i) {
      const long k = sample_negbin_at_least2(r, p, rng);
      ASSERT_GE(k, 2);
      if (k < top) ++hist[static_cast<std::size_t>(k)];
    }
    EXPECT_GT(stats::chi_square_gof(hist, probs).p_value, 1e-3) << r << " " << p;
  }
}
