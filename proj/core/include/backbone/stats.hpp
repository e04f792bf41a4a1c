#pragma once

#include <cstddef>
#include <vector>

namespace backbone::stats {

struct Interval {
  double low;
  double high;
};

/// Wilson score interval for a binomial proportion.
Interval wilson(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct MeanSe {
  double mean;
  double std_error;
  std::size_t n;
};

MeanSe mean_se(const std::vector<double>& xs);

struct ChiSquare {
  double statistic;
  int dof;
  double p_value;
};

/// Pearson goodness of fit of counts against cell probabilities. Cells are
/// pooled from the right until each has expected count >= min_expected; any
/// probability mass not covered by `probs` goes into the last cell.
ChiSquare chi_square_gof(const std::vector<long>& observed, const std::vector<double>& probs,
                         double min_expected = 5.0);

/// Inverse-Gaussian first-passage CDF: P(T_b <= t) for Brownian motion with
/// drift -rho started at distance d > 0 above an absorbing level.
double first_passage_cdf(double d, double rho, double t);

}  // namespace backbone::stats
