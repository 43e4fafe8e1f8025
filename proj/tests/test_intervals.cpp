#include "catch_amalgamated.hpp"

#include "oracles.hpp"
#include "tolpred/errors.hpp"
#include "tolpred/intervals.hpp"
#include "tolpred/special.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numeric>

using namespace tolpred;
using Catch::Approx;

namespace bm = boost::math;

namespace {

double bt_q(double df, double p) { return bm::quantile(bm::students_t_distribution<>(df), p); }
double bz_q(double p) { return bm::quantile(bm::normal_distribution<>(), p); }
double bgamma_q(double shape, double scale, double p) {
    return bm::quantile(bm::gamma_distribution<>(shape, scale), p);
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sd(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
}

// log P(Bin(n, 1/2) <= x) computed by direct summation
double binom_half_cdf(long long n, long long x) {
    if (x < 0) return 0.0;
    if (x >= n) return 1.0;
    double acc = 0.0;
    const double ln2n = n * std::log(2.0);
    for (long long j = 0; j <= x; ++j)
        acc += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) - ln2n);
    return acc;
}

// interarrival example: 2.61 days (2.13, 3.19), shape 5.22, 280 subjects to go
FitResult interarrival_fit() {
    const double se = se_from_reported_ci(2.61, 2.13, 3.19, 0.95, Link::Log);
    return summary_fit(FitFamily::Gamma, Link::Log, 2.61, se, 20, 5.22);
}

// daily recruitment: 2.69 per week (2.20, 3.28), dispersion 0.46
FitResult count_fit() {
    const double se = se_from_reported_ci(2.69 / 7, 2.20 / 7, 3.28 / 7, 0.95, Link::Log);
    auto f = summary_fit(FitFamily::QuasiPoisson, Link::Log, 2.69 / 7, se, 20, std::nullopt, 0.46);
    f.exposure_total = 7.0 * 20;
    return f;
}

}  // namespace

TEST_CASE("reported CI to SE") {
    const double z = bz_q(0.975);
    CHECK(se_from_reported_ci(2.61, 2.13, 3.19, 0.95, Link::Log) ==
          Approx(std::log(2.61 / 2.13) / z).epsilon(1e-14));
    CHECK(se_from_reported_ci(2.61, 2.13, 3.19, 0.95, Link::Log, SeRule::Symmetric) ==
          Approx(std::log(3.19 / 2.13) / (2 * z)).epsilon(1e-14));
    CHECK(se_from_reported_ci(5.0, 4.0, 7.0, 0.9, Link::Identity) == Approx(2.0 / bz_q(0.95)).epsilon(1e-14));
    CHECK_THROWS_AS(se_from_reported_ci(5.0, 6.0, 7.0, 0.9, Link::Log), DomainError);
}

TEST_CASE("interarrival recruitment example") {
    const auto fit = interarrival_fit();
    const PredictionTarget tgt{20, 280};
    CHECK(fit.se_g_mu() == Approx(0.10369).margin(5e-6));

    SECTION("link pivot matches an independent t-quantile computation") {
        const auto iv = predict_sum_link(fit, tgt, 0.95);
        const double se = std::sqrt(20.0) * fit.se_g_mu() * std::sqrt(1.0 / 20 + 1.0 / 280);
        const double t = bt_q(19, 0.975);
        CHECK(iv.lower == Approx(280 * 2.61 * std::exp(-t * se)).epsilon(1e-12));
        CHECK(iv.upper == Approx(280 * 2.61 * std::exp(t * se)).epsilon(1e-12));
        CHECK(iv.lower == Approx(583.76).margin(0.01));
        CHECK(iv.upper == Approx(914.87).margin(0.01));
        CHECK(iv.method == Method::LinkPivot);
        CHECK(*iv.point == Approx(730.8));
    }
    SECTION("CI plug-in prediction reproduces the reported limits") {
        IntervalEstimate ci;
        ci.lower = 2.13;
        ci.upper = 3.19;
        const auto mean_ci = scale_interval(ci, 280);
        CHECK(std::round(mean_ci.lower) == 596);
        CHECK(std::round(mean_ci.upper) == 893);
        const auto iv = predict_sum_plugci(fit, tgt, 0.95, ci);
        CHECK(iv.lower == Approx(bgamma_q(280 * 5.22, 2.13 / 5.22, 0.025)).epsilon(1e-10));
        CHECK(iv.upper == Approx(bgamma_q(280 * 5.22, 3.19 / 5.22, 0.975)).epsilon(1e-10));
        CHECK(std::round(iv.lower) == 566);
        CHECK(std::round(iv.upper) == 940);
    }
    SECTION("CI plug-in contains plug-in, F pivot with known shape is close to plug-in") {
        const auto a = predict_sum_plugci(fit, tgt, 0.95);
        const auto b = predict_sum_plugin(fit, tgt, 0.95);
        CHECK(a.lower < b.lower);
        CHECK(a.upper > b.upper);
        const auto f = predict_sum_fpivot(2.61, 20, 280, 5.22, 0.95);
        CHECK(f.lower < b.lower);
        CHECK(f.upper > b.upper);
    }
    SECTION("one-sided limits spend alpha on one end") {
        PivotOptions o;
        o.sided = Sided::Upper;
        const auto up = predict_sum_link(fit, tgt, 0.95, o);
        const double se = std::sqrt(20.0) * fit.se_g_mu() * std::sqrt(1.0 / 20 + 1.0 / 280);
        CHECK(up.upper == Approx(280 * 2.61 * std::exp(bt_q(19, 0.95) * se)).epsilon(1e-12));
        CHECK(up.lower == 0.0);
        CHECK(up.lower_open);
    }
}

TEST_CASE("dispersed count recruitment example") {
    const auto fit = count_fit();
    const PredictionTarget tgt{20, 730};
    SECTION("link pivot with normal reference and sqrt(2) combined SE") {
        const auto iv = predict_sum_link(fit, tgt, 0.95);
        const double se = std::sqrt(2.0) * std::log(2.69 / 2.20) / bz_q(0.975);
        CHECK(iv.lower == Approx(730 * 2.69 / 7 * std::exp(-bz_q(0.975) * se)).epsilon(1e-12));
        CHECK(iv.lower == Approx(211.10).margin(0.01));
        CHECK(iv.upper == Approx(372.80).margin(0.01));
        CHECK(*iv.lower_int == 211);
    }
    SECTION("CI plug-in with the gamma approximation") {
        IntervalEstimate ci;
        ci.lower = 2.20 / 7;
        ci.upper = 3.28 / 7;
        CHECK(std::round(730 * ci.lower) == 229);
        CHECK(std::round(730 * ci.upper) == 342);
        const auto iv = predict_sum_plugci(fit, tgt, 0.95, ci);
        CHECK(iv.lower == Approx(bgamma_q(730 * ci.lower / 0.46, 0.46, 0.025)).epsilon(1e-10));
        CHECK(std::round(iv.lower) == 210);
        CHECK(std::round(iv.upper) == 367);
    }
    SECTION("exposure-scaled variant") {
        PivotOptions o;
        o.count_variance = CountVariance::ExposureScaled;
        CHECK(pivot_se(fit, tgt, o) == Approx(fit.se_g_mu() * std::sqrt(1 + 140.0 / 730)).epsilon(1e-14));
    }
    SECTION("count predictor is centered on the expected count and rounded outward") {
        const auto iv = predict_count_kris(fit, 730, 0.95);
        CHECK(iv.lower < 280.5);
        CHECK(iv.upper > 280.5);
        CHECK(*iv.lower_int <= iv.lower);
        CHECK(*iv.upper_int >= iv.upper);
        CHECK(kris_pvalue_upper(fit, 730, iv.lower) == Approx(0.025).margin(1e-9));
        CHECK(kris_pvalue_upper(fit, 730, iv.upper) == Approx(0.975).margin(1e-9));
    }
}

TEST_CASE("count predictor agrees with the exact conditional test for large counts") {
    // X = 500 events over exposure 1, future exposure 1, no overdispersion.
    auto f = summary_fit(FitFamily::QuasiPoisson, Link::Log, 500.0, 1.0 / std::sqrt(500.0), 1, std::nullopt, 1.0);
    f.exposure_total = 1.0;
    const auto iv = predict_count_kris(f, 1.0, 0.95);
    // exact conditional limits: smallest x with P(Bin(500 + x, 1/2) <= 500) <= 0.025 etc.
    long long up = 500;
    while (binom_half_cdf(500 + up, 500) > 0.025) ++up;
    long long lo = 500;
    while (lo > 0 && 1.0 - binom_half_cdf(500 + lo, 499) > 0.025) --lo;
    CHECK(std::abs(iv.upper - up) <= 2.0);
    CHECK(std::abs(iv.lower - lo) <= 2.0);
}

TEST_CASE("odds-ratio phase 3 prediction") {
    const double se = se_from_reported_ci(3.75, 1.03, 14.05, 0.95, Link::Log);
    CHECK(se == Approx(0.67392).margin(5e-5));
    const auto fit = summary_fit(FitFamily::BinomialLogit, Link::Logit, std::log(3.75), se, 100);
    const auto iv = predict_or(fit, 100, 600, 0.95);
    const double c = std::sqrt(100.0) * se * std::sqrt(1.0 / 100 + 1.0 / 600);
    CHECK(iv.lower == Approx(3.75 * std::exp(-bz_q(0.975) * c)).epsilon(1e-12));
    CHECK(iv.lower == Approx(0.90).margin(0.005));
    CHECK(iv.upper == Approx(15.62).margin(0.005));
    const auto tv = predict_or(fit, 100, 600, 0.95, Reference::StudentT);
    CHECK(tv.upper == Approx(3.75 * std::exp(bt_q(99, 0.975) * c)).epsilon(1e-12));
    CHECK_THROWS_AS(predict_or(interarrival_fit(), 100, 600, 0.95), DomainError);
}

TEST_CASE("normal theory intervals") {
    SECTION("exact prediction covers a new observation at the nominal rate") {
        RngStream rng(11, 0);
        const int reps = 20000, n = 8;
        int hit = 0;
        for (int r = 0; r < reps; ++r) {
            const auto y = sample(DistSpec::normal(3.0, 2.0), rng, n + 1);
            const std::vector<double> obs(y.begin(), y.begin() + n);
            if (normal_exact_prediction(mean(obs), sd(obs), n, 0.9).contains(y[n])) ++hit;
        }
        const double cov = double(hit) / reps;
        CHECK(std::abs(cov - 0.9) < 4 * std::sqrt(0.09 / reps));
    }
    SECTION("exact tolerance brackets both population quantiles at the nominal rate") {
        RngStream rng(12, 0);
        const int reps = 8000, n = 12;
        const double p = 0.8, q_lo = 3.0 + 2.0 * bz_q(0.1), q_hi = 3.0 + 2.0 * bz_q(0.9);
        int lo_hit = 0, hi_hit = 0;
        for (int r = 0; r < reps; ++r) {
            const auto y = sample(DistSpec::normal(3.0, 2.0), rng, n);
            const auto iv = normal_exact_tolerance(mean(y), sd(y), n, p, 0.9);
            lo_hit += iv.lower <= q_lo;
            hi_hit += iv.upper >= q_hi;
        }
        // each one-sided bound holds with confidence 1 - alpha/2
        CHECK(std::abs(double(lo_hit) / reps - 0.95) < 4 * std::sqrt(0.0475 / reps));
        CHECK(std::abs(double(hi_hit) / reps - 0.95) < 4 * std::sqrt(0.0475 / reps));
    }
    SECTION("exact tolerance endpoints use noncentral t quantiles") {
        const auto iv = normal_exact_tolerance(10.0, 2.0, 15, 0.9, 0.95);
        const double rn = std::sqrt(15.0);
        bm::non_central_t_distribution<> lo(14, bz_q(0.05) * rn), hi(14, bz_q(0.95) * rn);
        CHECK(iv.lower == Approx(10.0 + bm::quantile(lo, 0.025) * 2.0 / rn).epsilon(1e-9));
        CHECK(iv.upper == Approx(10.0 + bm::quantile(hi, 0.975) * 2.0 / rn).epsilon(1e-9));
        const auto one = normal_exact_tolerance(10.0, 2.0, 15, 0.9, 0.95, Sided::Lower);
        bm::non_central_t_distribution<> lo1(14, bz_q(0.1) * rn);
        CHECK(one.lower == Approx(10.0 + bm::quantile(lo1, 0.05) * 2.0 / rn).epsilon(1e-9));
        CHECK(std::isinf(one.upper));
    }
    SECTION("known sigma uses the normal quantile") {
        const auto iv = normal_exact_prediction(0.0, 99.0, 5, 0.95, 1.0);
        CHECK(iv.upper == Approx(bz_q(0.975) * std::sqrt(1.2)).epsilon(1e-13));
    }
    SECTION("approximate prediction width ratio") {
        for (long long n : {3, 10, 50}) {
            const auto ex = normal_exact_prediction(1.0, 1.5, n, 0.95);
            const auto ap = normal_approx_prediction(1.0, 1.5, n, 0.95);
            const double rn = std::sqrt(double(n));
            CHECK(ap.width() / ex.width() == Approx((1 / rn + 1) / std::sqrt(1.0 / n + 1)).epsilon(1e-12));
        }
    }
    SECTION("approximate tolerance is wider than exact") {
        const auto ex = normal_exact_tolerance(0.0, 1.0, 20, 0.9, 0.95);
        const auto ap = normal_approx_tolerance(0.0, 1.0, 20, 0.9, 0.95);
        CHECK(ap.lower < ex.lower);
        CHECK(ap.upper > ex.upper);
    }
    SECTION("errors") {
        CHECK_THROWS_AS(normal_exact_prediction(0, 1, 1, 0.95), InsufficientDataError);
        CHECK_THROWS_AS(normal_exact_prediction(0, 1, 5, 1.0), DomainError);
        CHECK_THROWS_AS(normal_exact_tolerance(0, 1, 5, 0.0, 0.9), DomainError);
    }
}

TEST_CASE("noncentral t tolerance reduces to the normal-theory form for one unit") {
    // identity link, SE = s / sqrt(n): the sum of one future unit is the observation itself
    const double ybar = 4.0, s = 1.3;
    const long long n = 25;
    auto fit = summary_fit(FitFamily::Gamma, Link::Identity, ybar, s / std::sqrt(double(n)), n, 9.0);
    const auto a = tolerance_nct(fit, 0.9, 0.95, {n, 1.0});
    const auto b = normal_exact_tolerance(ybar, s, n, 0.9, 0.95);
    CHECK(a.lower == Approx(b.lower).epsilon(1e-12));
    CHECK(a.upper == Approx(b.upper).epsilon(1e-12));
    // U future units: center U mu, noncentrality scaled by sqrt(n / U)
    const auto c = tolerance_nct(fit, 0.9, 0.95, {n, 4.0});
    bm::non_central_t_distribution<> d(24, bz_q(0.95) * std::sqrt(25.0 / 4.0));
    CHECK(c.upper == Approx(4 * ybar + bm::quantile(d, 0.975) * 4 * s / 5.0).epsilon(1e-9));
}

TEST_CASE("F pivot is exact for gamma data with known shape") {
    RngStream rng(21, 0);
    const int reps = 20000, n = 10;
    const double k = 2.0, mu = 3.0, U = 5.0;
    int hit = 0;
    for (int r = 0; r < reps; ++r) {
        const auto y = sample(DistSpec::gamma_mean_shape(mu, k), rng, n);
        const auto fut = sample(DistSpec::gamma_mean_shape(mu, k), rng, 5);
        const double sum = std::accumulate(fut.begin(), fut.end(), 0.0);
        if (predict_sum_fpivot(mean(y), n, U, k, 0.9).contains(sum)) ++hit;
    }
    CHECK(std::abs(double(hit) / reps - 0.9) < 4 * std::sqrt(0.09 / reps));
}

TEST_CASE("delta tolerance") {
    SECTION("zero covariance gives plug-in percentiles") {
        const auto fit = summary_fit(FitFamily::Gamma, Link::Log, 2.0, 0.0, 30, 3.0);
        const auto iv = tolerance_delta(fit, 0.9, 0.95, {30, 2.0});
        CHECK(iv.lower == Approx(bgamma_q(6.0, 2.0 / 3.0, 0.05)).epsilon(1e-10));
        CHECK(iv.upper == Approx(bgamma_q(6.0, 2.0 / 3.0, 0.95)).epsilon(1e-10));
    }
    SECTION("indefinite covariance is rejected") {
        auto fit = summary_fit(FitFamily::Gamma, Link::Log, 2.0, 0.1, 30, 3.0);
        fit.cov_mu_k[3] = 0.01;
        fit.cov_mu_k[1] = fit.cov_mu_k[2] = 1.0;
        CHECK_THROWS_AS(tolerance_delta(fit, 0.9, 0.95, {30, 1.0}), DomainError);
    }
    SECTION("quantile SE agrees with a parametric bootstrap") {
        RngStream rng(31, 0);
        const auto y = sample(DistSpec::gamma_mean_shape(2.5, 4.0), rng, 100);
        auto fit = fit_gamma_intercept(y);
        fit.se_kind = SeKind::Model;
        const double se = delta_quantile_se(fit, 0.975, 1.0, Link::Log);
        const DistSpec gen = DistSpec::gamma_mean_shape(fit.mu_hat, *fit.k_hat);
        std::vector<double> lq;
        for (int b = 0; b < 2000; ++b) {
            const auto f = fit_gamma_intercept(sample(gen, rng, 100));
            lq.push_back(std::log(quantile(DistSpec::gamma_mean_shape(f.mu_hat, *f.k_hat), 0.975)));
        }
        CHECK(se == Approx(sd(lq)).epsilon(0.1));
    }
    SECTION("t critical value on the log scale") {
        RngStream rng(32, 0);
        const auto y = sample(DistSpec::gamma_mean_shape(2.5, 4.0), rng, 40);
        const auto fit = fit_gamma_intercept(y);
        const auto iv = tolerance_delta(fit, 0.95, 0.9, {40, 3.0});
        const DistSpec d = DistSpec::gamma(3.0 * *fit.k_hat, fit.mu_hat / *fit.k_hat);
        const double se = delta_quantile_se(fit, 0.975, 3.0, Link::Log);
        CHECK(iv.upper == Approx(quantile(d, 0.975) * std::exp(bt_q(39, 0.95) * se)).epsilon(1e-12));
    }
}

TEST_CASE("CI plug-in tolerance uses the lower shape limit") {
    const auto fit = interarrival_fit();
    IntervalEstimate mu, k;
    mu.lower = 2.13, mu.upper = 3.19;
    k.lower = 2.69, k.upper = 9.03;
    const auto iv = tolerance_plugci(fit, 0.95, 0.95, {20, 1.0}, mu, k);
    CHECK(iv.lower == Approx(bgamma_q(2.69, 2.13 / 2.69, 0.025)).epsilon(1e-10));
    CHECK(iv.upper == Approx(bgamma_q(2.69, 3.19 / 2.69, 0.975)).epsilon(1e-10));
    k.lower = 6.0;
    CHECK_THROWS_AS(tolerance_plugci(fit, 0.95, 0.95, {20, 1.0}, mu, k), DomainError);
}

TEST_CASE("method names round trip") {
    for (int i = 0; i <= static_cast<int>(Method::ProfileLRCI); ++i) {
        const auto m = static_cast<Method>(i);
        CHECK(method_from_string(to_string(m)) == m);
    }
    CHECK_THROWS_AS(method_from_string("nope"), DomainError);
    CHECK(reference_from_string(to_string(Reference::StudentT)) == Reference::StudentT);
}
