#pragma once

// Special functions underlying every distribution in dist.hpp.
//
// Incomplete gamma and beta use the series / continued-fraction split at the
// usual argument threshold (x < a + 1 for gamma, x < (a + 1) / (a + b + 2)
// for beta). The log prefactors are assembled so that large shape parameters
// (thousands) keep ~1e-13 relative accuracy.

#include <utility>

namespace tolpred::special {

// log Gamma(x) for x > 0 (Lanczos, g = 7).
double log_gamma(double x);

// log Beta(a, b).
double log_beta(double a, double b);

// psi(x) and psi'(x) for x > 0.
double digamma(double x);
double trigamma(double x);

// Regularized lower/upper incomplete gamma P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b) and its complement. The pair form
// takes y = 1 - x computed by the caller to avoid cancellation, and returns
// {I_x(a,b), 1 - I_x(a,b)}.
std::pair<double, double> beta_inc_pair(double a, double b, double x, double y);
double beta_inc(double a, double b, double x);
double beta_inc_upper(double a, double b, double x);

// Standard normal.
double normal_pdf(double z);
double normal_cdf(double z);
double normal_sf(double z);
double normal_quantile(double p);

}  // namespace tolpred::special
