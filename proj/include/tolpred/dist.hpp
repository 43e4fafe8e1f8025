#pragma once

// Probability kernel: cdf / sf / pdf / quantile / sampling for the families
// used by the interval constructors, plus the noncentral t.

#include "tolpred/rng.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace tolpred {

enum class Family { Normal, StudentT, NoncentralT, ChiSquare, F, Gamma, Exponential, Poisson, Binomial, Weibull };

std::string to_string(Family f);

// Parameter layout per family (p1, p2):
//   Normal(mean, sd)          StudentT(df, -)       NoncentralT(df, nc)
//   ChiSquare(df, -)          F(df1, df2)           Gamma(shape, scale)
//   Exponential(mean, -)      Poisson(lambda, -)    Binomial(n, prob)
//   Weibull(shape, scale)
struct DistSpec {
    Family family = Family::Normal;
    double p1 = 0.0;
    double p2 = 1.0;

    static DistSpec normal(double mean = 0.0, double sd = 1.0);
    static DistSpec student_t(double df);
    static DistSpec noncentral_t(double df, double nc);
    static DistSpec chi_square(double df);
    static DistSpec f(double df1, double df2);
    static DistSpec gamma(double shape, double scale);
    // Gamma(k, mu/k): mean mu, shape k.
    static DistSpec gamma_mean_shape(double mean, double shape);
    static DistSpec exponential(double mean);
    static DistSpec poisson(double lambda);
    static DistSpec binomial(long long n, double prob);
    static DistSpec weibull(double shape, double scale);

    bool discrete() const noexcept { return family == Family::Poisson || family == Family::Binomial; }
    double mean() const;

    // Throws DomainError when parameters are out of range.
    void validate() const;
};

double cdf(const DistSpec& d, double x);
double sf(const DistSpec& d, double x);  // 1 - cdf, computed without cancellation
double pdf(const DistSpec& d, double x);  // pmf for discrete families
// Continuous: x with cdf(x) = p. Discrete: smallest x with cdf(x) >= p.
double quantile(const DistSpec& d, double p);

double draw(const DistSpec& d, RngStream& rng);
std::vector<double> sample(const DistSpec& d, RngStream& rng, std::size_t count);

double student_t_cdf(double x, double df);
double student_t_quantile(double p, double df);
double noncentral_t_cdf(double x, double df, double nc);
double noncentral_t_sf(double x, double df, double nc);
double noncentral_t_quantile(double p, double df, double nc);

}  // namespace tolpred
