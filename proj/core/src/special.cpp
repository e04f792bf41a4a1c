#include "backbone/special.hpp"

#include <cmath>

namespace backbone::special {

namespace {

constexpr double kSeriesCutoff = 0.1;

// Σ_{j>=j0} (-u)^j / j!
double exp_series_tail(double u, int j0) {
  double term = 1.0;
  for (int j = 1; j <= j0; ++j) term *= -u / j;
  double sum = 0.0;
  for (int j = j0; j < j0 + 40; ++j) {
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    term *= -u / (j + 1);
  }
  return sum;
}

}  // namespace

double exp_remainder2(double u) {
  if (std::abs(u) < kSeriesCutoff) return exp_series_tail(u, 2);
  return std::expm1(-u) + u;
}

double exp_remainder3(double u) {
  if (std::abs(u) < kSeriesCutoff) return -exp_series_tail(u, 3);
  return -std::expm1(-u) - u + 0.5 * u * u;
}

double binomial_remainder(double m, double t, int j0) {
  // coefficients of (1+t)^{-m}: c_0 = 1, c_{j+1} = c_j * (-(m+j)) / (j+1)
  if (std::abs(t) < kSeriesCutoff) {
    double c = 1.0;
    double tj = 1.0;
    for (int j = 0; j < j0; ++j) {
      c *= -(m + j) / (j + 1);
      tj *= t;
    }
    double sum = 0.0;
    for (int j = j0; j < j0 + 60; ++j) {
      const double term = c * tj;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      c *= -(m + j) / (j + 1);
      tj *= t;
    }
    return sum;
  }
  double value = std::exp(-m * std::log1p(t));
  double c = 1.0;
  double tj = 1.0;
  for (int j = 0; j < j0; ++j) {
    value -= c * tj;
    c *= -(m + j) / (j + 1);
    tj *= t;
  }
  return value;
}

double log_remainder3(double t) {
  if (std::abs(t) < kSeriesCutoff) {
    // Σ_{j>=3} (-1)^{j+1} t^j / j
    double tj = t * t * t;
    double sum = 0.0;
    for (int j = 3; j < 60; ++j) {
      const double term = (j % 2 == 1 ? 1.0 : -1.0) * tj / j;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      tj *= t;
    }
    return sum;
  }
  return std::log1p(t) - t + 0.5 * t * t;
}

double poisson_at_least2(double mu) {
  if (mu <= 0.0) return 0.0;
  if (mu < 0.5) {
    // e^{-mu} Σ_{n>=2} mu^n/n!
    double term = 0.5 * mu * mu;
    double sum = 0.0;
    for (int n = 2; n < 80; ++n) {
      sum += term;
      if (term <= 1e-18 * sum) break;
      term *= mu / (n + 1);
    }
    return std::exp(-mu) * sum;
  }
  return -std::expm1(-mu) - mu * std::exp(-mu);
}

double negbin_at_least2(double r, double p) {
  if (p <= 0.0) return 0.0;
  if (p < 0.25) {
    // Σ_{n>=2} C(n+r-1, n) p^n (1-p)^r
    double coef = r * (r + 1.0) / 2.0;
    double pn = p * p;
    double sum = 0.0;
    for (int n = 2; n < 400; ++n) {
      const double term = coef * pn;
      sum += term;
      if (term <= 1e-18 * sum) break;
      coef *= (n + r) / (n + 1.0);
      pn *= p;
    }
    return std::exp(r * std::log1p(-p)) * sum;
  }
  const double base = std::exp(r * std::log1p(-p));
  return 1.0 - base * (1.0 + r * p);
}

double log_poisson_pmf(long n, double mu) {
  if (mu == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return n * std::log(mu) - mu - std::lgamma(static_cast<double>(n) + 1.0);
}

double log_negbin_pmf(long n, double r, double p) {
  const double nd = static_cast<double>(n);
  return std::lgamma(nd + r) - std::lgamma(r) - std::lgamma(nd + 1.0) + nd * std::log(p) +
         r * std::log1p(-p);
}

}  // namespace backbone::special
