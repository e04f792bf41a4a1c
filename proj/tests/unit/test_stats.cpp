#include <gtest/gtest.h>

#include <cmath>

#include "backbone/stats.hpp"
#include "oracles.hpp"

using namespace backbone;

TEST(Stats, WilsonInterval) {
  const auto ci = stats::wilson(5, 10);
  EXPECT_NEAR(ci.low, 0.2365931, 1e-6);
  EXPECT_NEAR(ci.high, 0.7634069, 1e-6);
  const auto zero = stats::wilson(0, 100);
  EXPECT_NEAR(zero.low, 0.0, 1e-15);
  EXPECT_NEAR(zero.high, 0.0369935, 1e-6);
}

TEST(Stats, MeanAndStandardError) {
  const auto ms = stats::mean_se({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(ms.mean, 2.5);
  EXPECT_NEAR(ms.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(Stats, ChiSquareExactFit) {
  const auto c = stats::chi_square_gof({25, 50, 25}, {0.25, 0.5, 0.25});
  EXPECT_NEAR(c.statistic, 0.0, 1e-12);
  EXPECT_NEAR(c.p_value, 1.0, 1e-12);
  const auto bad = stats::chi_square_gof({90, 5, 5}, {0.25, 0.5, 0.25});
  EXPECT_LT(bad.p_value, 1e-10);
}

TEST(Stats, FirstPassageDistribution) {
  // zero drift: reflection principle
  for (double t : {0.5, 2.0, 10.0}) {
    EXPECT_NEAR(stats::first_passage_cdf(1.0, 0.0, t), std::erfc(1.0 / std::sqrt(2.0 * t)), 1e-14);
  }
  // with drift, the CDF is the integral of the inverse-Gaussian density
  const double d = 1.0, rho = 0.5, T = 2.0;
  const double ref = oracle::simpson(
      [&](double t) {
        if (t == 0.0) return 0.0;
        return d / std::sqrt(2 * M_PI * t * t * t) * std::exp(-(d - rho * t) * (d - rho * t) / (2 * t));
      },
      0.0, T, 200000);
  EXPECT_NEAR(stats::first_passage_cdf(d, rho, T), ref, 1e-9);
}
