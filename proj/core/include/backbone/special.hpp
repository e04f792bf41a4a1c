#pragma once

// Cancellation-free building blocks for the closed-form mechanism integrals.

namespace backbone::special {

/// e^{-u} - 1 + u.
double exp_remainder2(double u);

/// 1 - e^{-u} - u + u^2/2, i.e. the integral of exp_remainder2 over [0, u].
double exp_remainder3(double u);

/// (1+t)^{-m} minus its Taylor polynomial of degree j0-1, for t > -1.
double binomial_remainder(double m, double t, int j0);

/// log(1+t) - t + t^2/2.
double log_remainder3(double t);

/// P(N >= 2) for N ~ Poisson(mu).
double poisson_at_least2(double mu);

/// P(N >= 2) for N ~ NegativeBinomial(r, p), pmf C(n+r-1, n) p^n (1-p)^r.
double negbin_at_least2(double r, double p);

double log_poisson_pmf(long n, double mu);
double log_negbin_pmf(long n, double r, double p);

}  // namespace backbone::special
