#include "catch_amalgamated.hpp"

#include "tolpred/curves.hpp"
#include "tolpred/errors.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <sstream>

using namespace tolpred;
using Catch::Approx;

namespace {

FitResult interarrival_fit() {
    const double se = se_from_reported_ci(2.61, 2.13, 3.19, 0.95, Link::Log);
    return summary_fit(FitFamily::Gamma, Link::Log, 2.61, se, 20, 5.22);
}

FitResult or_fit() {
    const double se = se_from_reported_ci(3.75, 1.03, 14.05, 0.95, Link::Log);
    return summary_fit(FitFamily::BinomialLogit, Link::Logit, std::log(3.75), se, 100);
}

double max_step_near(const CurveTable& t, double x) {
    for (std::size_t i = 1; i < t.grid.size(); ++i)
        if (t.grid[i] >= x) return t.grid[i] - t.grid[i - 1];
    return t.grid.back() - t.grid[t.grid.size() - 2];
}

void check_invariants(const CurveTable& t) {
    double integral = 0.0;
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
        CHECK(t.H[i] + t.H_minus[i] == Approx(1.0).margin(1e-15));
        CHECK(t.C[i] <= 0.5);
        CHECK(t.density[i] >= 0.0);
        if (i > 0) {
            CHECK(t.H[i] >= t.H[i - 1] - 1e-13);
            integral += 0.5 * (t.density[i] + t.density[i - 1]) * (t.grid[i] - t.grid[i - 1]);
        }
    }
    CHECK(integral >= 0.99);
    CHECK(integral <= 1.0 + 1e-3);
    // C peaks next to the split
    const auto it = std::max_element(t.C.begin(), t.C.end());
    CHECK(std::abs(t.grid[it - t.C.begin()] - t.split) <= max_step_near(t, t.split) + 1e-12);
    CHECK(*it >= 0.5 - 0.01);
}

}  // namespace

TEST_CASE("link pivot p-value function") {
    const auto fit = interarrival_fit();
    const PredictionTarget tgt{20, 280};
    CHECK(pvalue_upper(fit, 280 * 2.61, Method::LinkPivot, tgt) == Approx(0.5).margin(1e-15));
    const auto iv = predict_sum_link(fit, tgt, 0.95);
    CHECK(pvalue_upper(fit, iv.lower, Method::LinkPivot, tgt) == Approx(0.025).margin(1e-12));
    CHECK(pvalue_upper(fit, iv.upper, Method::LinkPivot, tgt) == Approx(0.975).margin(1e-12));
    CHECK(pvalue_upper(fit, 583.0, Method::LinkPivot, tgt) == Approx(0.025).margin(0.001));
    CHECK_THROWS_AS(pvalue_upper(fit, -1.0, Method::LinkPivot, tgt), DomainError);
}

TEST_CASE("curves reproduce interval endpoints") {
    const auto fit = interarrival_fit();
    const PredictionTarget tgt{20, 280};
    SECTION("link pivot") {
        const auto t = build_curve(fit, Method::LinkPivot, tgt);
        check_invariants(t);
        const auto iv = predict_sum_link(fit, tgt, 0.95);
        const auto c = crossings(t, 0.95);
        CHECK(std::abs(c.lower - iv.lower) < max_step_near(t, iv.lower));
        CHECK(std::abs(c.upper - iv.upper) < max_step_near(t, iv.upper));
        CHECK(t.split == Approx(t.point).epsilon(1e-10));
        CHECK(t.clamped == 0);
    }
    SECTION("CI plug-in with the reported arms reproduces the worked limits") {
        CurveOptions o;
        o.arm_se = arm_se_from_reported_ci(2.61, 2.13, 3.19, 0.95, Link::Log);
        const auto t = build_curve(fit, Method::CIPlugPrediction, tgt, {}, o);
        check_invariants(t);
        const auto c = crossings(t, 0.95);
        CHECK(std::abs(c.lower - 566) <= 1.0);
        CHECK(std::abs(c.upper - 940) <= 1.0);
    }
    SECTION("CI plug-in curve agrees with the Wald interval") {
        const auto t = build_curve(fit, Method::CIPlugPrediction, tgt);
        const auto iv = predict_sum_plugci(fit, tgt, 0.8);
        const auto c = crossings(t, 0.8);
        CHECK(std::abs(c.lower - iv.lower) < max_step_near(t, iv.lower));
        CHECK(std::abs(c.upper - iv.upper) < max_step_near(t, iv.upper));
    }
    SECTION("F pivot with estimated and unit shape") {
        for (double k : {5.22, 1.0}) {
            CurveOptions o;
            o.fpivot_k = k;
            const auto t = build_curve(fit, Method::FPivot, tgt, {}, o);
            check_invariants(t);
            const auto iv = predict_sum_fpivot(2.61, 20, 280, k, 0.95);
            const auto c = crossings(t, 0.95);
            CHECK(std::abs(c.lower - iv.lower) < max_step_near(t, iv.lower));
            CHECK(std::abs(c.upper - iv.upper) < max_step_near(t, iv.upper));
        }
    }
    SECTION("level nesting and grid refinement") {
        const auto t = build_curve(fit, Method::LinkPivot, tgt, {GridSpec::Mode::Auto, 0, 0, 401});
        const auto fine = build_curve(fit, Method::LinkPivot, tgt, {GridSpec::Mode::Auto, 0, 0, 801});
        double prev_lo = -1, prev_hi = 1e300;
        for (double lv : {0.99, 0.95, 0.8, 0.5, 0.2}) {
            const auto c = crossings(t, lv);
            CHECK(c.lower > prev_lo);
            CHECK(c.upper < prev_hi);
            prev_lo = c.lower;
            prev_hi = c.upper;
            const auto f = crossings(fine, lv);
            CHECK(std::abs(f.lower - c.lower) < max_step_near(t, c.lower));
            CHECK(std::abs(f.upper - c.upper) < max_step_near(t, c.upper));
        }
    }
    SECTION("density mode at the split") {
        const auto t = build_curve(fit, Method::LinkPivot, tgt, {GridSpec::Mode::Linear, 500, 1000, 2001});
        const auto it = std::max_element(t.density.begin(), t.density.end());
        // mode of a lognormal-type density sits below the median; stay within the spread of H
        CHECK(t.H[it - t.density.begin()] > 0.3);
        CHECK(t.H[it - t.density.begin()] < 0.5 + 1e-9);
    }
}

TEST_CASE("count curves") {
    const double se = se_from_reported_ci(2.69 / 7, 2.20 / 7, 3.28 / 7, 0.95, Link::Log);
    auto fit = summary_fit(FitFamily::QuasiPoisson, Link::Log, 2.69 / 7, se, 20, std::nullopt, 0.46);
    fit.exposure_total = 140;
    const PredictionTarget tgt{20, 730};
    for (Method m : {Method::LinkPivot, Method::CIPlugPrediction, Method::KrisPengCount}) {
        const auto t = build_curve(fit, m, tgt);
        check_invariants(t);
    }
    const auto t = build_curve(fit, Method::KrisPengCount, tgt);
    const auto iv = predict_count_kris(fit, 730, 0.95);
    const auto c = crossings(t, 0.95);
    CHECK(std::abs(c.lower - iv.lower) < max_step_near(t, iv.lower));
}

TEST_CASE("phase 3 success confidence") {
    const auto fit = or_fit();
    CHECK(minimum_detectable_or(fit, 100, 600) == Approx(1.71).margin(0.005));
    CHECK(success_confidence(fit, 100, 600, 3.75, SuccessScale::OddsRatio) == Approx(0.5).margin(1e-14));
    const double c = success_confidence(fit, 100, 600, 1.71, SuccessScale::OddsRatio);
    CHECK(c == Approx(0.86).margin(0.01));
    CHECK(1.0 - c == Approx(0.14).margin(0.01));
    const double z = boost::math::quantile(boost::math::normal_distribution<>(), 0.975);
    CHECK(success_confidence(fit, 100, 600, z, SuccessScale::ZStatistic) == Approx(0.86).margin(0.015));
    // the two scales agree when the threshold is the minimum detectable effect
    CHECK(success_confidence(fit, 100, 600, z, SuccessScale::ZStatistic) ==
          Approx(success_confidence(fit, 100, 600, minimum_detectable_or(fit, 100, 600), SuccessScale::OddsRatio))
              .margin(0.002));
    const auto t = build_curve(fit, Method::ORPrediction, {100, 600});
    check_invariants(t);
    const auto iv = predict_or(fit, 100, 600, 0.95);
    const auto cr = crossings(t, 0.95);
    CHECK(std::abs(cr.upper - iv.upper) < max_step_near(t, iv.upper));
}

TEST_CASE("curve CSV") {
    const auto t = build_curve(interarrival_fit(), Method::LinkPivot, {20, 280}, {GridSpec::Mode::Linear, 600, 800, 5});
    std::ostringstream os;
    write_curve_csv(os, t);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "value,H,H_minus,C,density");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 5);
    CHECK_THROWS_AS(build_curve(interarrival_fit(), Method::LinkPivot, {20, 280}, {GridSpec::Mode::Log, -1, 5, 10}),
                    DomainError);
}
