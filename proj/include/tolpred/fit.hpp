#pragma once

// Maximum-likelihood and quasi-likelihood fitters. Every fitter returns a
// FitResult carrying link-scale standard errors and the (mu, k) covariance
// that the interval constructors consume.

#include "tolpred/interval_types.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tolpred {

enum class FitFamily { Gamma, QuasiPoisson, BinomialLogit, WeibullAFT };
enum class Link { Identity, Log, Logit };
enum class SeKind { Model, Sandwich, Both };

std::string to_string(FitFamily f);
std::string to_string(Link l);
std::string to_string(SeKind s);
FitFamily family_from_string(const std::string& s);
Link link_from_string(const std::string& s);
SeKind se_kind_from_string(const std::string& s);

double link_apply(Link link, double mu);
double link_inverse(Link link, double eta);
// d g(mu) / d mu
double link_derivative(Link link, double mu);

struct SurvivalSample {
    double time = 0.0;
    bool event = true;
};

struct FitResult {
    FitFamily family = FitFamily::Gamma;
    Link link = Link::Log;
    // Fitted mean in outcome units (rate per exposure unit for counts);
    // log odds ratio for BinomialLogit.
    double mu_hat = 0.0;
    std::optional<double> k_hat;
    std::optional<double> phi_hat;
    double se_g_mu_model = 0.0;
    double se_g_mu_sandwich = 0.0;
    double se_k = 0.0;
    // Covariance of (mu_hat, k_hat) on the estimation scale, row-major 2x2.
    std::array<double, 4> cov_mu_k{0.0, 0.0, 0.0, 0.0};
    long long n_obs = 0;
    long long n_events = 0;
    double exposure_total = 0.0;
    double events_total = 0.0;
    double loglik = 0.0;
    // Which SE the interval constructors use by default.
    SeKind se_kind = SeKind::Sandwich;
    int iterations = 0;

    // Sufficient statistics kept for likelihood-ratio limits.
    double mean_log = 0.0;               // gamma: mean of log y
    std::array<double, 4> cells{};       // binomial: a, b, c, d
    std::shared_ptr<const std::vector<SurvivalSample>> survival;
    bool shape_fixed = false;
    // False for fits assembled from reported summaries: no likelihood is
    // available for profile limits.
    bool from_data = false;

    double se_g_mu() const;
    double se_g_mu(SeKind kind) const;
    double var_mu() const { return cov_mu_k[0]; }
    double var_k() const { return cov_mu_k[3]; }
    double cov_mk() const { return cov_mu_k[1]; }
    // Weibull scale lambda = mu / Gamma(1 + 1/k).
    double weibull_scale() const;
    // Weibull survival S(t); throws for other families.
    double survival_at(double t) const;
};

// Builds a FitResult from reported summaries (point estimate and link-scale
// SE) rather than raw data.
FitResult summary_fit(FitFamily family, Link link, double mu_hat, double se_g_mu, long long n_obs,
                      std::optional<double> k_hat = std::nullopt, std::optional<double> phi_hat = std::nullopt);

FitResult fit_gamma_intercept(const std::vector<double>& data, Link link = Link::Log,
                              SeKind se_kind = SeKind::Both);

// Solves log k - digamma(k) = rhs for k > 0 (rhs > 0).
double gamma_shape_from_rhs(double rhs);

// Gamma log-likelihood of data summarized by (n, mean, mean of log).
double gamma_loglik(double mu, double k, long long n, double ybar, double mean_log);

FitResult fit_quasipoisson(const std::vector<double>& events, const std::vector<double>& exposure,
                           Link link = Link::Log);

// Single-regressor GLM fitted by IRLS: rate(z) = g^{-1}(b0 + b1 z), mean =
// exposure * rate. Variance function mu (quasi-Poisson) or mu^2 (gamma).
struct GlmFit {
    FitFamily family = FitFamily::QuasiPoisson;
    Link link = Link::Log;
    std::array<double, 2> coef{0.0, 0.0};
    std::array<double, 4> cov{0.0, 0.0, 0.0, 0.0};           // phi * inverse information
    std::array<double, 4> cov_sandwich{0.0, 0.0, 0.0, 0.0};
    double phi = 1.0;
    double deviance = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    long long n_obs = 0;
    std::vector<double> fitted;  // fitted means per observation
    double rate(double z) const;
};

GlmFit fit_quasipoisson_glm(const std::vector<double>& events, const std::vector<double>& exposure,
                            const std::vector<double>& regressor, Link link = Link::Log);
GlmFit fit_gamma_glm(const std::vector<double>& y, const std::vector<double>& regressor, Link link = Link::Log);

// 2x2 logistic fit. Cells: a = treated events, b = treated non-events,
// c = control events, d = control non-events.
FitResult fit_binomial_logit(const std::vector<int>& y, const std::vector<int>& trt, bool continuity_correction = false);
FitResult fit_binomial_table(double a, double b, double c, double d, bool continuity_correction = false);

// Weibull with right censoring, reported as (mean, shape). A fixed shape
// turns this into a one-parameter fit for the scale.
FitResult fit_weibull_censored(const std::vector<SurvivalSample>& data, std::optional<double> fixed_shape = std::nullopt);
double weibull_loglik(const std::vector<SurvivalSample>& data, double scale, double shape);

struct StepFunction {
    std::vector<double> times;     // jump times, increasing
    std::vector<double> values;    // value from times[i] (inclusive) onward
    double initial = 1.0;
    double operator()(double t) const;
};

StepFunction km_estimator(const std::vector<SurvivalSample>& data);

enum class Param { Mu, K };

// Likelihood-ratio limits: where the profile deviance reaches the
// chi-square(1) quantile at `level`.
IntervalEstimate profile_lr_ci(const FitResult& fit, Param param, double level = 0.95);

// Profile deviance 2 (l_max - l_profile(value)); exposed so callers can
// verify endpoints.
double profile_deviance(const FitResult& fit, Param param, double value);

// Wald CI for the natural-scale parameter: mean (gamma, counts, Weibull) or
// odds ratio (binomial), built on the link scale and back-transformed.
IntervalEstimate wald_ci(const FitResult& fit, double level = 0.95, std::optional<SeKind> kind = std::nullopt);

// Natural-scale point: mu_hat, or exp(mu_hat) for the odds ratio.
double natural_point(const FitResult& fit);

}  // namespace tolpred
