#pragma once

// P-value functions and confidence curves over hypothesis values of a
// prediction target.
//
// H(y) is the upper p-value function (a cdf over y), H_minus = 1 - H, and the
// confidence curve is C = H below the split point and 1 - H above it. The
// split is the hypothesis where H = 1/2 (the point prediction for the link
// pivot), where C is set to exactly 1/2.

#include "tolpred/intervals.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tolpred {

struct CurveOptions {
    PivotOptions pivot;
    std::optional<double> fpivot_k;  // F pivot shape; default k-hat (1 for exponential)
    // Link-scale SEs below and above the estimate for the CI plug-in curve,
    // so that a reported asymmetric CI is reproduced at its own level.
    std::optional<std::pair<double, double>> arm_se;
};

// H(y) for one of: LinkPivot, CIPlugPrediction, FPivot, PlugIn,
// KrisPengCount, ORPrediction. The target carries n and N - n (or m, or the
// future exposure).
double pvalue_upper(const FitResult& fit, double y, Method method, const PredictionTarget& target,
                    const CurveOptions& opt = {});

// Hypothesis value where H(y) = prob.
double curve_quantile(const FitResult& fit, double prob, Method method, const PredictionTarget& target,
                      const CurveOptions& opt = {});

struct GridSpec {
    enum class Mode { Auto, Linear, Log };
    Mode mode = Mode::Auto;
    double lower = 0.0;  // ignored in Auto mode
    double upper = 0.0;
    int points = 2001;
};

struct CurveTable {
    std::vector<double> grid, H, H_minus, C, density;
    Method method = Method::LinkPivot;
    double point = 0.0;   // point prediction
    double split = 0.0;   // where H = 1/2
    int clamped = 0;      // density values clamped at zero
};

CurveTable build_curve(const FitResult& fit, Method method, const PredictionTarget& target,
                       const GridSpec& grid = {}, const CurveOptions& opt = {});

// Two-sided interval read off the table where C = (1 - level) / 2, by
// linear interpolation between grid points. Ends outside the grid are NaN.
IntervalEstimate crossings(const CurveTable& table, double level);

enum class SuccessScale { OddsRatio, ZStatistic };

// Confidence that the future odds-ratio estimate from m subjects exceeds the
// threshold (odds-ratio scale) or that its Wald z statistic exceeds the
// threshold (z scale). This is 1 - H at the threshold: a confidence level,
// not a probability about the future trial.
double success_confidence(const FitResult& fit, long long n, long long m, double threshold, SuccessScale scale,
                          Reference ref = Reference::Normal);

// Smallest odds ratio significant in a future study of m subjects at two-sided
// level, with the SE scaled from the n-subject fit.
double minimum_detectable_or(const FitResult& fit, long long n, long long m, double level = 0.95);

void write_curve_csv(std::ostream& os, const CurveTable& table);

}  // namespace tolpred
