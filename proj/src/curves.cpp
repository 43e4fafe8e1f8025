#include "tolpred/curves.hpp"

#include "tolpred/errors.hpp"
#include "tolpred/numeric.hpp"
#include "tolpred/special.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace tolpred {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool log_scale(const FitResult& fit, Method method) {
    switch (method) {
        case Method::ORPrediction: return true;
        case Method::LinkPivot: return fit.link == Link::Log;
        default: return true;  // all other targets are positive sums
    }
}

double link_pivot_h(const FitResult& fit, double y, const PredictionTarget& target, const PivotOptions& po) {
    const double U = target.future_units;
    const double se = pivot_se(fit, target, po);
    const long long n = target.n > 0 ? target.n : fit.n_obs;
    const Reference ref = po.reference.value_or(default_reference(fit));
    if (fit.link == Link::Log && y <= 0.0) return 0.0;
    const double stat = (link_apply(fit.link, y / U) - link_apply(fit.link, fit.mu_hat)) / se;
    return reference_cdf(ref, static_cast<double>(n - 1), stat);
}

// H for the CI plug-in curve: the h with Q(h; mu(h), k) = y, where mu(h)
// is the mean whose one-sided Wald p-value is h.
double plugci_h(const FitResult& fit, double y, const PredictionTarget& target, const CurveOptions& opt) {
    if (y <= 0.0) return 0.0;
    const double k = fit.k_hat.value_or(1.0);
    const double g = link_apply(fit.link, fit.mu_hat);
    const double se = fit.se_g_mu();
    const double se_lo = opt.arm_se ? opt.arm_se->first : se;
    const double se_hi = opt.arm_se ? opt.arm_se->second : se;
    auto y_of = [&](double z) {
        const double mu = link_inverse(fit.link, g + z * (z < 0.0 ? se_lo : se_hi));
        if (!(mu > 0.0)) return 0.0;
        return quantile(future_sum_distribution(fit, target.future_units, mu, k), special::normal_cdf(z));
    };
    constexpr double zmax = 8.0;
    if (y <= y_of(-zmax)) return 0.0;
    if (y >= y_of(zmax)) return 1.0;
    const double z = numeric::brent([&](double z) { return std::log(y_of(z)) - std::log(y); }, -zmax, zmax, 1e-12);
    return special::normal_cdf(z);
}

double point_of(const FitResult& fit, Method method, const PredictionTarget& target) {
    if (method == Method::ORPrediction) return std::exp(fit.mu_hat);
    return target.future_units * fit.mu_hat;
}

}  // namespace

double pvalue_upper(const FitResult& fit, double y, Method method, const PredictionTarget& target,
                    const CurveOptions& opt) {
    if (std::isnan(y)) throw DomainError("hypothesis value is NaN");
    switch (method) {
        case Method::LinkPivot:
            if (fit.family == FitFamily::BinomialLogit) throw DomainError("use ORPrediction for odds-ratio targets");
            if (fit.link == Link::Log && y <= 0.0) throw DomainError("hypothesis must be > 0 under a log link");
            return link_pivot_h(fit, y, target, opt.pivot);
        case Method::CIPlugPrediction:
            return plugci_h(fit, y, target, opt);
        case Method::FPivot: {
            const double k = opt.fpivot_k.value_or(fit.k_hat.value_or(1.0));
            const long long n = target.n > 0 ? target.n : fit.n_obs;
            if (y <= 0.0) return 0.0;
            const DistSpec F = DistSpec::f(2.0 * target.future_units * k, 2.0 * static_cast<double>(n) * k);
            return cdf(F, y / (target.future_units * fit.mu_hat));
        }
        case Method::PlugIn:
            if (y <= 0.0) return 0.0;
            return cdf(future_sum_distribution(fit, target.future_units, fit.mu_hat, fit.k_hat.value_or(1.0)), y);
        case Method::KrisPengCount:
            return kris_pvalue_upper(fit, target.future_units, y);
        case Method::ORPrediction: {
            if (fit.family != FitFamily::BinomialLogit) throw DomainError("odds-ratio curve needs a binomial fit");
            if (!(y > 0.0)) throw DomainError("odds-ratio hypothesis must be > 0");
            const double n = static_cast<double>(target.n > 0 ? target.n : fit.n_obs);
            const double m = target.future_units;
            const double se = std::sqrt(n) * fit.se_g_mu() * std::sqrt(1.0 / n + 1.0 / m);
            const Reference ref = opt.pivot.reference.value_or(Reference::Normal);
            return reference_cdf(ref, n - 1.0, (std::log(y) - fit.mu_hat) / se);
        }
        default: break;
    }
    throw DomainError("no p-value function for method " + to_string(method));
}

double curve_quantile(const FitResult& fit, double prob, Method method, const PredictionTarget& target,
                      const CurveOptions& opt) {
    if (!(prob > 0.0 && prob < 1.0)) throw DomainError("probability must lie in (0, 1)");
    const double point = point_of(fit, method, target);
    if (!(point > 0.0)) throw DomainError("curve needs a positive point prediction");
    // search in log y
    auto f = [&](double t) { return pvalue_upper(fit, std::exp(t), method, target, opt) - prob; };
    auto [a, b] = numeric::expand_bracket(f, std::log(point), 0.25, -700.0, 700.0);
    return std::exp(numeric::brent(f, a, b, 1e-12));
}

CurveTable build_curve(const FitResult& fit, Method method, const PredictionTarget& target, const GridSpec& spec,
                       const CurveOptions& opt) {
    if (spec.points < 3) throw DomainError("grid needs at least 3 points");
    CurveTable t;
    t.method = method;
    t.point = point_of(fit, method, target);
    double lo = spec.lower, hi = spec.upper;
    bool use_log = spec.mode == GridSpec::Mode::Log;
    if (spec.mode == GridSpec::Mode::Auto) {
        lo = curve_quantile(fit, 0.001, method, target, opt);
        hi = curve_quantile(fit, 0.999, method, target, opt);
        use_log = log_scale(fit, method);
    }
    if (!(hi > lo)) throw DomainError("grid upper bound must exceed lower bound");
    if (use_log && !(lo > 0.0)) throw DomainError("log-spaced grid needs a positive lower bound");
    const int m = spec.points;
    t.grid.resize(m);
    for (int i = 0; i < m; ++i) {
        const double u = static_cast<double>(i) / (m - 1);
        t.grid[i] = use_log ? std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo))) : lo + u * (hi - lo);
    }
    t.H.resize(m);
    t.H_minus.resize(m);
    t.C.resize(m);
    t.density.resize(m);
    for (int i = 0; i < m; ++i) {
        t.H[i] = pvalue_upper(fit, t.grid[i], method, target, opt);
        t.H_minus[i] = 1.0 - t.H[i];
        t.C[i] = t.H[i] < 0.5 ? t.H[i] : (t.H[i] > 0.5 ? 1.0 - t.H[i] : 0.5);
    }
    for (int i = 0; i < m; ++i) {
        const int a = i == 0 ? 0 : i - 1;
        const int b = i == m - 1 ? m - 1 : i + 1;
        double d = (t.H[b] - t.H[a]) / (t.grid[b] - t.grid[a]);
        if (d < 0.0) {
            d = 0.0;
            ++t.clamped;
        }
        t.density[i] = d;
    }
    t.split = t.H.front() < 0.5 && t.H.back() > 0.5 ? curve_quantile(fit, 0.5, method, target, opt) : t.point;
    return t;
}

IntervalEstimate crossings(const CurveTable& t, double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
    const double a = 0.5 * (1.0 - level);
    auto cross = [&](double target) {
        for (std::size_t i = 1; i < t.grid.size(); ++i) {
            const double h0 = t.H[i - 1], h1 = t.H[i];
            if ((h0 - target) * (h1 - target) <= 0.0 && h1 != h0)
                return t.grid[i - 1] + (target - h0) / (h1 - h0) * (t.grid[i] - t.grid[i - 1]);
        }
        return std::nan("");
    };
    IntervalEstimate iv;
    iv.lower = cross(a);
    iv.upper = cross(1.0 - a);
    iv.level = level;
    iv.method = t.method;
    iv.target = Target::FutureSum;
    iv.point = t.point;
    return iv;
}

double success_confidence(const FitResult& fit, long long n, long long m, double threshold, SuccessScale scale,
                          Reference ref) {
    if (fit.family != FitFamily::BinomialLogit) throw DomainError("success confidence needs a binomial fit");
    if (n < 2 || m < 1) throw DomainError("success confidence needs n >= 2 and m >= 1");
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    if (scale == SuccessScale::OddsRatio) {
        if (!(threshold > 0.0)) throw DomainError("odds-ratio threshold must be > 0");
        CurveOptions o;
        o.pivot.reference = ref;
        return 1.0 - pvalue_upper(fit, threshold, Method::ORPrediction, {n, mm}, o);
    }
    // future z statistic: log(rho_m) / (se sqrt(n/m)); shift by the threshold
    const double se_future = fit.se_g_mu() * std::sqrt(nn / mm);
    const double stat = (fit.mu_hat / se_future - threshold) / std::sqrt(mm / nn + 1.0);
    return reference_cdf(ref, nn - 1.0, stat);
}

double minimum_detectable_or(const FitResult& fit, long long n, long long m, double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
    if (n < 1 || m < 1) throw DomainError("sample sizes must be >= 1");
    const double z = special::normal_quantile(0.5 + 0.5 * level);
    return std::exp(z * std::sqrt(static_cast<double>(n)) * fit.se_g_mu() / std::sqrt(static_cast<double>(m)));
}

void write_curve_csv(std::ostream& os, const CurveTable& t) {
    os << "value,H,H_minus,C,density\n";
    os << std::setprecision(12);
    for (std::size_t i = 0; i < t.grid.size(); ++i)
        os << t.grid[i] << ',' << t.H[i] << ',' << t.H_minus[i] << ',' << t.C[i] << ',' << t.density[i] << '\n';
}

}  // namespace tolpred
