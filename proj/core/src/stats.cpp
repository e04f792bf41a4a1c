#include "backbone/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace backbone::stats {

Interval wilson(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

MeanSe mean_se(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n == 0) return {0.0, 0.0, 0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0, 1};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

ChiSquare chi_square_gof(const std::vector<long>& observed, const std::vector<double>& probs,
                         double min_expected) {
  if (observed.size() != probs.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof: size mismatch");
  }
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), 0L));
  std::vector<double> exp_cells;
  std::vector<double> obs_cells;
  double e_acc = 0.0, o_acc = 0.0;
  const double covered = std::accumulate(probs.begin(), probs.end(), 0.0);
  // pool from the right, including the uncovered mass in the last cell
  e_acc = std::max(0.0, 1.0 - covered) * total;
  for (std::size_t i = probs.size(); i-- > 0;) {
    e_acc += probs[i] * total;
    o_acc += static_cast<double>(observed[i]);
    if (e_acc >= min_expected) {
      exp_cells.push_back(e_acc);
      obs_cells.push_back(o_acc);
      e_acc = o_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp_cells.empty()) {
      exp_cells.push_back(e_acc);
      obs_cells.push_back(o_acc);
    } else {
      exp_cells.back() += e_acc;
      obs_cells.back() += o_acc;
    }
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < exp_cells.size(); ++i) {
    const double diff = obs_cells[i] - exp_cells[i];
    stat += diff * diff / exp_cells[i];
  }
  const int dof = static_cast<int>(exp_cells.size()) - 1;
  double p = 1.0;
  if (dof > 0) {
    boost::math::chi_squared dist(dof);
    p = boost::math::cdf(boost::math::complement(dist, stat));
  }
  return {stat, dof, p};
}

double first_passage_cdf(double d, double rho, double t) {
  if (!(d > 0.0)) return 1.0;
  if (!(t > 0.0)) return 0.0;
  // hitting -d for B_t - rho t:  Φ((-d + rho t)/√t) + e^{2 rho d} Φ((-d - rho t)/√t)
  const boost::math::normal n01;
  const double st = std::sqrt(t);
  const double a = boost::math::cdf(n01, (-d + rho * t) / st);
  const double lb = boost::math::cdf(n01, (-d - rho * t) / st);
  return a + std::exp(2.0 * rho * d) * lb;
}

}  // namespace backbone::stats
