#pragma once

#include <optional>
#include <string>

namespace tolpred {

enum class Method {
    LinkPivot,           // future sum, link-scale t pivot
    CIPlugPrediction,    // future sum, quantiles at the CI limits for the mean
    DeltaTolerance,      // percentile tolerance, delta-method link pivot
    NoncentralTolerance, // percentile tolerance via noncentral t
    CIPlugTolerance,     // percentile tolerance, quantiles at CI limits of (mu, k)
    FPivot,
    PlugIn,
    NormalExactPrediction,
    NormalExactTolerance,
    NormalApproxTolerance,
    NormalApproxPrediction,
    KrisPengCount,
    ORPrediction,
    WaldCI,
    ProfileLRCI,
};

enum class Target { FutureSum, FutureObservation, PopulationPercentile, MiddleContent, ObservableEstimate, Parameter };

enum class Sided { Two, Lower, Upper };

struct IntervalEstimate {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    std::optional<double> content_p;
    Method method = Method::LinkPivot;
    Target target = Target::FutureSum;
    Sided sided = Sided::Two;
    // Point prediction or estimate the interval is built around.
    std::optional<double> point;
    // Count targets: floor(lower), ceil(upper).
    std::optional<long long> lower_int;
    std::optional<long long> upper_int;
    // Set when an endpoint ran into the parameter-domain boundary.
    bool lower_open = false;
    bool upper_open = false;

    double width() const { return upper - lower; }
    bool contains(double x) const { return lower <= x && x <= upper; }
};

std::string to_string(Method m);
std::string to_string(Target t);
std::string to_string(Sided s);
Method method_from_string(const std::string& s);

}  // namespace tolpred
