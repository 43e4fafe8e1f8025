#pragma once

// Tolerance and prediction interval constructors.
//
// Notation: a fit summarizes n observations; the target is the sum of
// N - n future observations (future_units), a future count over a future
// exposure, or a future odds-ratio estimate from m subjects.

#include "tolpred/dist.hpp"
#include "tolpred/fit.hpp"
#include "tolpred/interval_types.hpp"

#include <optional>

namespace tolpred {

// Reference distribution for link-scale pivots.
enum class Reference { StudentT, Normal };

// Variance of the future term in count pivots.
//   EqualVariance:   se_comb = sqrt(2) * se(log rate)
//   ExposureScaled:  se_comb = se(log rate) * sqrt(1 + E_obs / E_future)
enum class CountVariance { EqualVariance, ExposureScaled };

// How a reported CI is turned back into a link-scale SE.
//   Symmetric:  (g(U) - g(L)) / (2 z)
//   WidestArm:  max(g(U) - g(p), g(p) - g(L)) / z
enum class SeRule { Symmetric, WidestArm };

std::string to_string(Reference r);
Reference reference_from_string(const std::string& s);

struct PredictionTarget {
    long long n = 0;            // observations behind the fit
    double future_units = 1.0;  // N - n, m, or future exposure (time units)
};

struct PivotOptions {
    Sided sided = Sided::Two;
    std::optional<Reference> reference;  // default: normal for counts, t(n-1) otherwise
    std::optional<SeKind> se_kind;       // default: fit.se_kind
    CountVariance count_variance = CountVariance::EqualVariance;
};

// Critical-value helpers shared with the curve builders.
Reference default_reference(const FitResult& fit);
double reference_quantile(Reference ref, double df, double p);
double reference_cdf(Reference ref, double df, double x);

// ---------------------------------------------------------------------------
// normal theory

IntervalEstimate normal_exact_prediction(double ybar, double s, long long n, double level,
                                         std::optional<double> sigma_known = std::nullopt,
                                         Sided sided = Sided::Two);
IntervalEstimate normal_exact_tolerance(double ybar, double s, long long n, double p, double level,
                                        Sided sided = Sided::Two);
// CI plug-in forms. The mean CI and the observation term share the t(n-1)
// critical value, so the prediction width exceeds the exact one by the
// factor (1/sqrt(n) + 1) / sqrt(1/n + 1).
IntervalEstimate normal_approx_tolerance(double ybar, double s, long long n, double p, double level);
IntervalEstimate normal_approx_prediction(double ybar, double s, long long n, double level);

// ---------------------------------------------------------------------------
// sums of future observations

// Distribution of the future sum under (mu, k): Gamma((N-n)k, mu/k) for
// gamma data, Gamma(E mu / phi, phi) for dispersed counts over exposure E,
// and the Weibull itself when a single future observation is targeted.
DistSpec future_sum_distribution(const FitResult& fit, double future_units, double mu, double k);

// Combined link-scale SE for the future-sum pivot.
double pivot_se(const FitResult& fit, const PredictionTarget& target, const PivotOptions& opt = {});

IntervalEstimate predict_sum_link(const FitResult& fit, const PredictionTarget& target, double level,
                                  const PivotOptions& opt = {});
IntervalEstimate predict_sum_plugci(const FitResult& fit, const PredictionTarget& target, double level,
                                    std::optional<IntervalEstimate> mu_ci = std::nullopt,
                                    Sided sided = Sided::Two);
IntervalEstimate predict_sum_fpivot(double ybar, long long n, double future_units, double k, double level,
                                    Sided sided = Sided::Two);
IntervalEstimate predict_sum_plugin(const FitResult& fit, const PredictionTarget& target, double level,
                                    Sided sided = Sided::Two);

// ---------------------------------------------------------------------------
// tolerance intervals for the middle 100p% of the future-sum distribution

IntervalEstimate tolerance_delta(const FitResult& fit, double p, double level, const PredictionTarget& target,
                                 std::optional<Link> link = std::nullopt, const PivotOptions& opt = {});
IntervalEstimate tolerance_nct(const FitResult& fit, double p, double level, const PredictionTarget& target,
                               const PivotOptions& opt = {});
IntervalEstimate tolerance_plugci(const FitResult& fit, double p, double level, const PredictionTarget& target,
                                  std::optional<IntervalEstimate> mu_ci = std::nullopt,
                                  std::optional<IntervalEstimate> k_ci = std::nullopt, Sided sided = Sided::Two);

// Delta-method SE of g(q) for the quantile q = F^{-1}(prob; mu, k) of the
// future-sum distribution, central differences through the quantile function.
double delta_quantile_se(const FitResult& fit, double prob, double future_units, Link link,
                         std::optional<SeKind> se_kind = std::nullopt);

// ---------------------------------------------------------------------------
// counts, odds ratios, helpers

IntervalEstimate predict_count_kris(const FitResult& fit, double future_exposure, double level);
// Upper p-value function of the count predictor at hypothesis x.
double kris_pvalue_upper(const FitResult& fit, double future_exposure, double x);

IntervalEstimate predict_or(const FitResult& fit, long long n, long long m, double level,
                            Reference ref = Reference::Normal, Sided sided = Sided::Two);

// Link-scale SEs of the lower and upper arms of a reported CI.
std::pair<double, double> arm_se_from_reported_ci(double point, double lower, double upper, double level, Link link);

double se_from_reported_ci(double point, double lower, double upper, double level, Link link,
                           SeRule rule = SeRule::WidestArm);

// Multiplies a mean-scale interval into a total (e.g. per-subject CI to
// days for N - n subjects).
IntervalEstimate scale_interval(const IntervalEstimate& ci, double factor);

// Adds floor(lower) / ceil(upper) for count targets.
IntervalEstimate with_rounded(IntervalEstimate iv);

}  // namespace tolpred
