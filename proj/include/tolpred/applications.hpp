#pragma once

// Recruitment with staggered sites and time-varying rates, Weibull
// time-on-treatment bands, and a helper for combining independent pivots.

#include "tolpred/curves.hpp"
#include "tolpred/fit.hpp"
#include "tolpred/intervals.hpp"

#include <optional>
#include <vector>

namespace tolpred {

// Per-period recruitment. Periods are contiguous from 1. Site-days in a
// period are exposure_days * active_sites.
struct RecruitmentSeries {
    std::vector<double> events;
    std::vector<double> exposure_days;
    std::vector<double> active_sites;
    // Future schedule for periods d+1, ..., D.
    std::vector<double> future_sites;
    std::vector<double> future_exposure_days;  // empty: one day per period

    std::size_t periods() const { return events.size(); }
    void validate() const;
    double site_days() const;
    double future_site_days() const;
};

// ---------------------------------------------------------------------------
// site-day pooling

// Rate per site per day pooled over every observed site-day, quasi-Poisson
// with the sandwich SE across periods.
FitResult site_day_fit(const RecruitmentSeries& series);

// Interval for the number of subjects recruited over the future site-days.
IntervalEstimate predict_sitedays(const FitResult& fit, const RecruitmentSeries& series, double level,
                                  const PivotOptions& opt = {});

// Pearson dispersion of per-period rates around the pooled rate. Large
// ratios suggest the per-site mean is drifting over time.
struct StationarityDiagnostic {
    double pearson = 0.0;
    long long df = 0;
    double ratio = 0.0;    // pearson / df
    double p_value = 0.0;  // chi-square upper tail, Poisson variance
};
StationarityDiagnostic stationarity(const RecruitmentSeries& series);

// ---------------------------------------------------------------------------
// trends

struct RegressorTransform {
    enum class Kind { LogPeriod, Root, Identity };
    Kind kind = Kind::LogPeriod;
    double root = 20.0;  // Root: z = l^(1/root)
    double apply(double l) const;
};

enum class Extrapolation { Model, Constant };

struct TrendFit {
    GlmFit glm;
    RegressorTransform transform;
    int first_period = 1;
    int last_period = 0;
    double unit_exposure = 1.0;  // exposure per future period (mean over the fit window)

    // Fitted mean per period (count per unit_exposure, or interarrival mean).
    double mean_at(int l, Extrapolation ex = Extrapolation::Model) const;
    // Gradient of mean_at with respect to the coefficients.
    std::array<double, 2> gradient_at(int l, Extrapolation ex = Extrapolation::Model) const;
};

// Quasi-Poisson GLM of events on transform(period) with exposure offset,
// over periods [first, last] (last = 0: all).
TrendFit fit_trend(const RecruitmentSeries& series, RegressorTransform transform, Link link, int first = 1,
                   int last = 0);
// Gamma GLM of interarrival times on transform(subject index).
TrendFit fit_interarrival_trend(const std::vector<double>& interarrivals, RegressorTransform transform, Link link);

// Prediction for the count in period l (or summed over [from, to]) through a
// log-scale pivot with normal reference: SE^2 = Var(log mean-hat) + phi / mean.
IntervalEstimate predict_rate_at(const TrendFit& trend, int l, double level,
                                 Extrapolation ex = Extrapolation::Model);
IntervalEstimate predict_sum_rate(const TrendFit& trend, int from, int to, double level,
                                  Extrapolation ex = Extrapolation::Model);
// Upper p-value of the summed-count pivot at hypothesis y.
double pvalue_sum_rate(const TrendFit& trend, int from, int to, double y, Extrapolation ex = Extrapolation::Model);

// Remaining time for subjects [from, to] from an interarrival trend, with
// t(n - 1) reference.
IntervalEstimate predict_sum_interarrival(const TrendFit& trend, int from, int to, double level);

struct HorizonResult {
    int point = 0;        // smallest horizon whose point prediction reaches the target
    int optimistic = 0;   // smallest horizon whose upper prediction limit reaches it
    int pessimistic = 0;  // smallest horizon whose lower prediction limit reaches it
};

HorizonResult solve_target_window(const TrendFit& trend, double target_subjects, double level, int max_horizon = 600,
                                  Extrapolation ex = Extrapolation::Model);

// ---------------------------------------------------------------------------
// pivot combination

// One independent log-scale prediction: point and SE of log(point).
struct PivotTerm {
    double point = 0.0;
    double se_log = 0.0;
    double sign = 1.0;  // -1 for a subtracted term, e.g. attrition
};

// Interval for sum(sign * point) with variances added on the natural scale
// and the result pivoted on the log scale.
IntervalEstimate combine_link_pivots(const std::vector<PivotTerm>& terms, double level);

// ---------------------------------------------------------------------------
// Weibull time on treatment

struct WeibullBand {
    enum class Kind { PopulationTolerance, RepeatedExperiment };
    Kind kind = Kind::PopulationTolerance;
    long long future_events = 100;  // RepeatedExperiment only
};

struct BandPoint {
    double p = 0.0;
    double estimate = 0.0;  // fitted p-quantile
    IntervalEstimate interval;
};

// Per-p limits for the p-quantile of one observation: a t(n - 1) log-scale
// pivot with delta-method SE, inflated by sqrt(n) sqrt(1/n + 1/m) for the
// percentile estimate of a repeated experiment with m events (n = events).
std::vector<BandPoint> weibull_bands(const FitResult& fit, const std::vector<double>& p_grid, WeibullBand band,
                                     double level);

// Prediction for one future subject from the CI plug-in construction.
IntervalEstimate weibull_subject_prediction(const FitResult& fit, double level, bool profile_ci = true);

}  // namespace tolpred
