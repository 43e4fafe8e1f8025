#include "tolpred/intervals.hpp"

#include "tolpred/errors.hpp"
#include "tolpred/numeric.hpp"
#include "tolpred/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tolpred {

using special::normal_quantile;

// ===========================================================================
// names

std::string to_string(Method m) {
    switch (m) {
        case Method::LinkPivot: return "link_pivot";
        case Method::CIPlugPrediction: return "ci_plug_prediction";
        case Method::DeltaTolerance: return "delta_tolerance";
        case Method::NoncentralTolerance: return "noncentral_tolerance";
        case Method::CIPlugTolerance: return "ci_plug_tolerance";
        case Method::FPivot: return "f_pivot";
        case Method::PlugIn: return "plug_in";
        case Method::NormalExactPrediction: return "normal_exact_prediction";
        case Method::NormalExactTolerance: return "normal_exact_tolerance";
        case Method::NormalApproxTolerance: return "normal_approx_tolerance";
        case Method::NormalApproxPrediction: return "normal_approx_prediction";
        case Method::KrisPengCount: return "kris_peng_count";
        case Method::ORPrediction: return "or_prediction";
        case Method::WaldCI: return "wald_ci";
        case Method::ProfileLRCI: return "profile_lr_ci";
    }
    return "unknown";
}

Method method_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(Method::ProfileLRCI); ++i) {
        const auto m = static_cast<Method>(i);
        if (to_string(m) == s) return m;
    }
    throw DomainError("unknown method '" + s + "'");
}

std::string to_string(Target t) {
    switch (t) {
        case Target::FutureSum: return "future_sum";
        case Target::FutureObservation: return "future_observation";
        case Target::PopulationPercentile: return "population_percentile";
        case Target::MiddleContent: return "middle_content";
        case Target::ObservableEstimate: return "observable_estimate";
        case Target::Parameter: return "parameter";
    }
    return "unknown";
}

std::string to_string(Sided s) {
    switch (s) {
        case Sided::Two: return "two";
        case Sided::Lower: return "lower";
        case Sided::Upper: return "upper";
    }
    return "unknown";
}

std::string to_string(Reference r) { return r == Reference::Normal ? "normal" : "t"; }

Reference reference_from_string(const std::string& s) {
    if (s == "normal" || s == "z") return Reference::Normal;
    if (s == "t" || s == "student_t") return Reference::StudentT;
    throw DomainError("unknown reference distribution '" + s + "'");
}

// ===========================================================================
// shared helpers

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
}

void check_content(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("tolerance content p must lie in (0, 1)");
}

// Tail probabilities for the lower and upper endpoints. A one-sided
// interval spends all of alpha on its finite end; the open end is NaN.
std::pair<double, double> tails(double level, Sided sided) {
    check_level(level);
    const double a = 1.0 - level;
    switch (sided) {
        case Sided::Two: return {0.5 * a, 1.0 - 0.5 * a};
        case Sided::Lower: return {a, std::nan("")};
        case Sided::Upper: return {std::nan(""), level};
    }
    return {0.5 * a, 1.0 - 0.5 * a};
}

long long obs_count(const FitResult& fit, const PredictionTarget& t) { return t.n > 0 ? t.n : fit.n_obs; }

void check_future(double units) {
    if (!(units > 0.0) || !std::isfinite(units)) throw DomainError("future units must be positive");
}

IntervalEstimate make(double lo, double hi, double level, Method m, Target t, Sided s) {
    IntervalEstimate iv;
    iv.lower = lo;
    iv.upper = hi;
    iv.level = level;
    iv.method = m;
    iv.target = t;
    iv.sided = s;
    iv.lower_open = std::isinf(lo) || (s == Sided::Upper);
    iv.upper_open = std::isinf(hi) || (s == Sided::Lower);
    return iv;
}

SeKind kind_of(const FitResult& fit, const PivotOptions& opt) { return opt.se_kind.value_or(fit.se_kind); }

double shape_or_one(const FitResult& fit) { return fit.k_hat.value_or(1.0); }

}  // namespace

Reference default_reference(const FitResult& fit) {
    return fit.family == FitFamily::QuasiPoisson ? Reference::Normal : Reference::StudentT;
}

double reference_quantile(Reference ref, double df, double p) {
    if (ref == Reference::Normal) return normal_quantile(p);
    if (!(df > 0.0)) throw InsufficientDataError("t reference needs n >= 2");
    return student_t_quantile(p, df);
}

double reference_cdf(Reference ref, double df, double x) {
    if (ref == Reference::Normal) return special::normal_cdf(x);
    if (!(df > 0.0)) throw InsufficientDataError("t reference needs n >= 2");
    return student_t_cdf(x, df);
}

IntervalEstimate with_rounded(IntervalEstimate iv) {
    if (std::isfinite(iv.lower)) iv.lower_int = static_cast<long long>(std::floor(iv.lower));
    if (std::isfinite(iv.upper)) iv.upper_int = static_cast<long long>(std::ceil(iv.upper));
    return iv;
}

IntervalEstimate scale_interval(const IntervalEstimate& ci, double factor) {
    IntervalEstimate out = ci;
    out.lower = factor * ci.lower;
    out.upper = factor * ci.upper;
    if (factor < 0.0) std::swap(out.lower, out.upper);
    if (ci.point) out.point = factor * *ci.point;
    return out;
}

std::pair<double, double> arm_se_from_reported_ci(double point, double lower, double upper, double level,
                                                  Link link) {
    check_level(level);
    if (!(lower <= point && point <= upper)) throw DomainError("reported CI must contain the point estimate");
    const double z = normal_quantile(0.5 + 0.5 * level);
    const double gp = link_apply(link, point);
    return {(gp - link_apply(link, lower)) / z, (link_apply(link, upper) - gp) / z};
}

double se_from_reported_ci(double point, double lower, double upper, double level, Link link, SeRule rule) {
    check_level(level);
    if (!(lower <= point && point <= upper)) throw DomainError("reported CI must contain the point estimate");
    const double z = normal_quantile(0.5 + 0.5 * level);
    const double gl = link_apply(link, lower), gp = link_apply(link, point), gu = link_apply(link, upper);
    if (rule == SeRule::Symmetric) return (gu - gl) / (2.0 * z);
    return std::max(gu - gp, gp - gl) / z;
}

// ===========================================================================
// normal theory

IntervalEstimate normal_exact_prediction(double ybar, double s, long long n, double level,
                                         std::optional<double> sigma_known, Sided sided) {
    if (n < 2 && !sigma_known) throw InsufficientDataError("prediction needs n >= 2");
    if (n < 1) throw InsufficientDataError("prediction needs n >= 1");
    const double sd = sigma_known ? *sigma_known : s;
    if (!(sd > 0.0)) throw DomainError("standard deviation must be > 0");
    const auto [plo, phi] = tails(level, sided);
    const Reference ref = sigma_known ? Reference::Normal : Reference::StudentT;
    const double df = static_cast<double>(n - 1);
    const double f = sd * std::sqrt(1.0 / n + 1.0);
    const double lo = std::isnan(plo) ? -kInf : ybar + reference_quantile(ref, df, plo) * f;
    const double hi = std::isnan(phi) ? kInf : ybar + reference_quantile(ref, df, phi) * f;
    auto iv = make(lo, hi, level, Method::NormalExactPrediction, Target::FutureObservation, sided);
    iv.point = ybar;
    return iv;
}

IntervalEstimate normal_exact_tolerance(double ybar, double s, long long n, double p, double level, Sided sided) {
    if (n < 2) throw InsufficientDataError("tolerance interval needs n >= 2");
    if (!(s > 0.0)) throw DomainError("standard deviation must be > 0");
    check_content(p);
    const auto [plo, phi] = tails(level, sided);
    const double df = static_cast<double>(n - 1);
    const double rn = std::sqrt(static_cast<double>(n));
    // two-sided: bounds for the (1-p)/2 and (1+p)/2 quantiles; one-sided: for
    // the 1-p (lower bound) or p (upper bound) quantile
    const double c_lo = sided == Sided::Two ? 0.5 * (1.0 - p) : 1.0 - p;
    const double c_hi = sided == Sided::Two ? 0.5 * (1.0 + p) : p;
    double lo = -kInf, hi = kInf;
    if (!std::isnan(plo)) lo = ybar + noncentral_t_quantile(plo, df, normal_quantile(c_lo) * rn) * s / rn;
    if (!std::isnan(phi)) hi = ybar + noncentral_t_quantile(phi, df, normal_quantile(c_hi) * rn) * s / rn;
    auto iv = make(lo, hi, level, Method::NormalExactTolerance,
                   sided == Sided::Two ? Target::MiddleContent : Target::PopulationPercentile, sided);
    iv.content_p = p;
    iv.point = ybar;
    return iv;
}

IntervalEstimate normal_approx_tolerance(double ybar, double s, long long n, double p, double level) {
    if (n < 2) throw InsufficientDataError("tolerance interval needs n >= 2");
    if (!(s > 0.0)) throw DomainError("standard deviation must be > 0");
    check_content(p);
    check_level(level);
    const double a = 1.0 - level;
    const double df = static_cast<double>(n - 1);
    const double t = student_t_quantile(1.0 - 0.5 * a, df);
    const double half = t * s / std::sqrt(static_cast<double>(n));
    // upper confidence limit for sigma from the chi-square pivot
    const double sigma_u = s * std::sqrt(df / quantile(DistSpec::chi_square(df), 0.5 * a));
    const double z = normal_quantile(0.5 * (1.0 + p));
    auto iv = make(ybar - half - z * sigma_u, ybar + half + z * sigma_u, level, Method::NormalApproxTolerance,
                   Target::MiddleContent, Sided::Two);
    iv.content_p = p;
    iv.point = ybar;
    return iv;
}

IntervalEstimate normal_approx_prediction(double ybar, double s, long long n, double level) {
    if (n < 2) throw InsufficientDataError("prediction needs n >= 2");
    if (!(s > 0.0)) throw DomainError("standard deviation must be > 0");
    check_level(level);
    const double t = student_t_quantile(1.0 - 0.5 * (1.0 - level), static_cast<double>(n - 1));
    const double half = t * s / std::sqrt(static_cast<double>(n)) + t * s;
    auto iv = make(ybar - half, ybar + half, level, Method::NormalApproxPrediction, Target::FutureObservation,
                   Sided::Two);
    iv.point = ybar;
    return iv;
}

// ===========================================================================
// future sums

DistSpec future_sum_distribution(const FitResult& fit, double future_units, double mu, double k) {
    check_future(future_units);
    if (!(mu > 0.0)) throw DomainError("future-sum distribution needs a positive mean");
    switch (fit.family) {
        case FitFamily::Gamma:
            if (!(k > 0.0)) throw DomainError("gamma shape must be > 0");
            return DistSpec::gamma(future_units * k, mu / k);
        case FitFamily::QuasiPoisson: {
            if (!fit.phi_hat) throw DomainError("count fit carries no dispersion");
            const double phi = *fit.phi_hat;
            return DistSpec::gamma(future_units * mu / phi, phi);
        }
        case FitFamily::WeibullAFT:
            if (future_units != 1.0)
                throw DomainError("Weibull future-sum distribution is only available for a single observation");
            return DistSpec::weibull(k, mu / std::exp(special::log_gamma(1.0 + 1.0 / k)));
        case FitFamily::BinomialLogit: break;
    }
    throw DomainError("no future-sum distribution for this family");
}

double pivot_se(const FitResult& fit, const PredictionTarget& target, const PivotOptions& opt) {
    check_future(target.future_units);
    const double se = fit.se_g_mu(kind_of(fit, opt));
    if (fit.family == FitFamily::QuasiPoisson) {
        if (opt.count_variance == CountVariance::EqualVariance) return std::sqrt(2.0) * se;
        if (!(fit.exposure_total > 0.0)) throw DomainError("exposure-scaled count variance needs the observed exposure");
        return se * std::sqrt(1.0 + fit.exposure_total / target.future_units);
    }
    const double n = static_cast<double>(obs_count(fit, target));
    if (n < 1.0) throw InsufficientDataError("pivot needs the observation count");
    return std::sqrt(n) * se * std::sqrt(1.0 / n + 1.0 / target.future_units);
}

IntervalEstimate predict_sum_link(const FitResult& fit, const PredictionTarget& target, double level,
                                  const PivotOptions& opt) {
    if (fit.family == FitFamily::BinomialLogit) throw DomainError("use predict_or for odds-ratio targets");
    check_future(target.future_units);
    const long long n = obs_count(fit, target);
    if (fit.family != FitFamily::QuasiPoisson && n < 2) throw InsufficientDataError("pivot needs n >= 2");
    const auto [plo, phi] = tails(level, opt.sided);
    const Reference ref = opt.reference.value_or(default_reference(fit));
    const double df = static_cast<double>(n - 1);
    const double se = pivot_se(fit, target, opt);
    const double g = link_apply(fit.link, fit.mu_hat);
    const double U = target.future_units;
    const double open_lo = fit.link == Link::Log ? 0.0 : -kInf;
    const double lo = std::isnan(plo) ? open_lo : U * link_inverse(fit.link, g + reference_quantile(ref, df, plo) * se);
    const double hi = std::isnan(phi) ? kInf : U * link_inverse(fit.link, g + reference_quantile(ref, df, phi) * se);
    auto iv = make(lo, hi, level, Method::LinkPivot,
                   U == 1.0 && fit.family != FitFamily::QuasiPoisson ? Target::FutureObservation : Target::FutureSum,
                   opt.sided);
    iv.lower_open = std::isnan(plo);
    iv.point = U * fit.mu_hat;
    return fit.family == FitFamily::QuasiPoisson ? with_rounded(iv) : iv;
}

IntervalEstimate predict_sum_plugci(const FitResult& fit, const PredictionTarget& target, double level,
                                    std::optional<IntervalEstimate> mu_ci, Sided sided) {
    check_future(target.future_units);
    const auto [plo, phi] = tails(level, sided);
    const double k = shape_or_one(fit);
    if (!(k > 0.0)) throw DomainError("shape must be > 0");
    double mu_lo, mu_hi;
    if (mu_ci) {
        if (!(mu_ci->lower <= fit.mu_hat && fit.mu_hat <= mu_ci->upper))
            throw DomainError("CI for the mean must satisfy lower <= estimate <= upper");
        mu_lo = mu_ci->lower;
        mu_hi = mu_ci->upper;
    } else {
        // Wald limits at the same one- or two-sided level
        const double se = fit.se_g_mu();
        const double g = link_apply(fit.link, fit.mu_hat);
        mu_lo = std::isnan(plo) ? fit.mu_hat : link_inverse(fit.link, g + normal_quantile(plo) * se);
        mu_hi = std::isnan(phi) ? fit.mu_hat : link_inverse(fit.link, g + normal_quantile(phi) * se);
    }
    if (!(mu_lo > 0.0)) throw DomainError("lower CI limit for the mean must be positive");
    const double U = target.future_units;
    const double lo = std::isnan(plo) ? 0.0 : quantile(future_sum_distribution(fit, U, mu_lo, k), plo);
    const double hi = std::isnan(phi) ? kInf : quantile(future_sum_distribution(fit, U, mu_hi, k), phi);
    auto iv = make(lo, hi, level, Method::CIPlugPrediction, U == 1.0 ? Target::FutureObservation : Target::FutureSum,
                   sided);
    iv.lower_open = std::isnan(plo);
    iv.point = U * fit.mu_hat;
    return fit.family == FitFamily::QuasiPoisson ? with_rounded(iv) : iv;
}

IntervalEstimate predict_sum_fpivot(double ybar, long long n, double future_units, double k, double level,
                                    Sided sided) {
    if (!(ybar > 0.0)) throw DomainError("F pivot needs a positive sample mean");
    if (!(k > 0.0)) throw DomainError("F pivot needs k > 0");
    if (n < 1) throw InsufficientDataError("F pivot needs n >= 1");
    check_future(future_units);
    const auto [plo, phi] = tails(level, sided);
    const DistSpec F = DistSpec::f(2.0 * future_units * k, 2.0 * static_cast<double>(n) * k);
    const double scale = future_units * ybar;
    const double lo = std::isnan(plo) ? 0.0 : scale * quantile(F, plo);
    const double hi = std::isnan(phi) ? kInf : scale * quantile(F, phi);
    auto iv = make(lo, hi, level, Method::FPivot, future_units == 1.0 ? Target::FutureObservation : Target::FutureSum,
                   sided);
    iv.lower_open = std::isnan(plo);
    iv.point = scale;
    return iv;
}

IntervalEstimate predict_sum_plugin(const FitResult& fit, const PredictionTarget& target, double level, Sided sided) {
    const auto [plo, phi] = tails(level, sided);
    const DistSpec d = future_sum_distribution(fit, target.future_units, fit.mu_hat, shape_or_one(fit));
    const double lo = std::isnan(plo) ? 0.0 : quantile(d, plo);
    const double hi = std::isnan(phi) ? kInf : quantile(d, phi);
    auto iv = make(lo, hi, level, Method::PlugIn,
                   target.future_units == 1.0 ? Target::FutureObservation : Target::FutureSum, sided);
    iv.lower_open = std::isnan(plo);
    iv.point = target.future_units * fit.mu_hat;
    return fit.family == FitFamily::QuasiPoisson ? with_rounded(iv) : iv;
}

// ===========================================================================
// tolerance

double delta_quantile_se(const FitResult& fit, double prob, double future_units, Link link,
                         std::optional<SeKind> se_kind) {
    const double mu = fit.mu_hat;
    const double k = shape_or_one(fit);
    const bool has_k = fit.family != FitFamily::QuasiPoisson && fit.k_hat.has_value();
    const double var_mu =
        std::pow(fit.se_g_mu(se_kind.value_or(fit.se_kind)) / link_derivative(fit.link, mu), 2);
    const double var_k = has_k ? fit.var_k() : 0.0;
    const double cov = has_k ? fit.cov_mk() : 0.0;
    if (!std::isfinite(var_mu) || !std::isfinite(var_k) || !std::isfinite(cov) || var_mu < 0.0 || var_k < 0.0 ||
        var_mu * var_k - cov * cov < -1e-12 * std::max(1e-300, var_mu * var_k)) {
        throw DomainError("covariance of (mu, k) is not positive semidefinite (numerical rank problem)");
    }
    auto q = [&](double m, double kk) { return quantile(future_sum_distribution(fit, future_units, m, kk), prob); };
    const double q0 = q(mu, k);
    const double hm = std::max(1e-4 * std::abs(mu), 1e-6);
    const double d_mu = (q(mu + hm, k) - q(mu - hm, k)) / (2.0 * hm);
    double d_k = 0.0;
    if (has_k && var_k > 0.0) {
        const double hk = std::min(std::max(1e-4 * k, 1e-6), 0.5 * k);
        d_k = (q(mu, k + hk) - q(mu, k - hk)) / (2.0 * hk);
    }
    const double var_q = std::max(0.0, d_mu * d_mu * var_mu + d_k * d_k * var_k + 2.0 * d_mu * d_k * cov);
    return link_derivative(link, q0) * std::sqrt(var_q);
}

IntervalEstimate tolerance_delta(const FitResult& fit, double p, double level, const PredictionTarget& target,
                                 std::optional<Link> link_opt, const PivotOptions& opt) {
    check_content(p);
    const Link link = link_opt.value_or(Link::Log);
    const long long n = obs_count(fit, target);
    if (n < 2) throw InsufficientDataError("tolerance interval needs n >= 2");
    const auto [plo, phi] = tails(level, opt.sided);
    const Reference ref = opt.reference.value_or(default_reference(fit));
    const double df = static_cast<double>(n - 1);
    const double U = target.future_units;
    const double c_lo = opt.sided == Sided::Two ? 0.5 * (1.0 - p) : 1.0 - p;
    const double c_hi = opt.sided == Sided::Two ? 0.5 * (1.0 + p) : p;
    const double k = shape_or_one(fit);
    double lo = link == Link::Log ? 0.0 : -kInf, hi = kInf;
    if (!std::isnan(plo)) {
        const double q = quantile(future_sum_distribution(fit, U, fit.mu_hat, k), c_lo);
        const double se = delta_quantile_se(fit, c_lo, U, link, opt.se_kind);
        lo = link_inverse(link, link_apply(link, q) + reference_quantile(ref, df, plo) * se);
    }
    if (!std::isnan(phi)) {
        const double q = quantile(future_sum_distribution(fit, U, fit.mu_hat, k), c_hi);
        const double se = delta_quantile_se(fit, c_hi, U, link, opt.se_kind);
        hi = link_inverse(link, link_apply(link, q) + reference_quantile(ref, df, phi) * se);
    }
    auto iv = make(lo, hi, level, Method::DeltaTolerance,
                   opt.sided == Sided::Two ? Target::MiddleContent : Target::PopulationPercentile, opt.sided);
    iv.lower_open = std::isnan(plo);
    iv.content_p = p;
    iv.point = quantile(future_sum_distribution(fit, U, fit.mu_hat, k), 0.5);
    return iv;
}

IntervalEstimate tolerance_nct(const FitResult& fit, double p, double level, const PredictionTarget& target,
                               const PivotOptions& opt) {
    check_content(p);
    const long long n = obs_count(fit, target);
    if (n < 2) throw InsufficientDataError("tolerance interval needs n >= 2");
    const double U = target.future_units;
    check_future(U);
    const auto [plo, phi] = tails(level, opt.sided);
    const double df = static_cast<double>(n - 1);
    // identity-scale SE of the estimated mean
    const double se_mu = fit.se_g_mu(kind_of(fit, opt)) / link_derivative(fit.link, fit.mu_hat);
    const double shift = std::sqrt(static_cast<double>(n) / U);
    const double c_lo = opt.sided == Sided::Two ? 0.5 * (1.0 - p) : 1.0 - p;
    const double c_hi = opt.sided == Sided::Two ? 0.5 * (1.0 + p) : p;
    double lo = -kInf, hi = kInf;
    if (!std::isnan(plo)) lo = U * fit.mu_hat + noncentral_t_quantile(plo, df, normal_quantile(c_lo) * shift) * U * se_mu;
    if (!std::isnan(phi)) hi = U * fit.mu_hat + noncentral_t_quantile(phi, df, normal_quantile(c_hi) * shift) * U * se_mu;
    auto iv = make(lo, hi, level, Method::NoncentralTolerance,
                   opt.sided == Sided::Two ? Target::MiddleContent : Target::PopulationPercentile, opt.sided);
    iv.content_p = p;
    iv.point = U * fit.mu_hat;
    return iv;
}

IntervalEstimate tolerance_plugci(const FitResult& fit, double p, double level, const PredictionTarget& target,
                                  std::optional<IntervalEstimate> mu_ci, std::optional<IntervalEstimate> k_ci,
                                  Sided sided) {
    check_content(p);
    check_level(level);
    if (!mu_ci) mu_ci = wald_ci(fit, level);
    if (!(mu_ci->lower <= fit.mu_hat && fit.mu_hat <= mu_ci->upper))
        throw DomainError("CI for the mean must satisfy lower <= estimate <= upper");
    double k_lo = 1.0;
    if (fit.family != FitFamily::QuasiPoisson) {
        if (!fit.k_hat) throw DomainError("CI plug-in tolerance needs a shape estimate");
        if (!k_ci) {
            if (fit.from_data && !fit.shape_fixed) {
                k_ci = profile_lr_ci(fit, Param::K, level);
            } else {
                const double z = normal_quantile(0.5 + 0.5 * level);
                const double r = fit.k_hat.value() > 0.0 ? fit.se_k / *fit.k_hat : 0.0;
                IntervalEstimate kc;
                kc.lower = *fit.k_hat * std::exp(-z * r);
                kc.upper = *fit.k_hat * std::exp(z * r);
                k_ci = kc;
            }
        }
        if (!(k_ci->lower <= *fit.k_hat && *fit.k_hat <= k_ci->upper))
            throw DomainError("CI for the shape must satisfy lower <= estimate <= upper");
        k_lo = k_ci->lower;
        if (!(k_lo > 0.0)) throw DomainError("lower CI limit for the shape must be positive");
    }
    const double U = target.future_units;
    const double c_lo = sided == Sided::Two ? 0.5 * (1.0 - p) : 1.0 - p;
    const double c_hi = sided == Sided::Two ? 0.5 * (1.0 + p) : p;
    const double lo = sided == Sided::Upper ? 0.0 : quantile(future_sum_distribution(fit, U, mu_ci->lower, k_lo), c_lo);
    const double hi = sided == Sided::Lower ? kInf : quantile(future_sum_distribution(fit, U, mu_ci->upper, k_lo), c_hi);
    auto iv = make(lo, hi, level, Method::CIPlugTolerance,
                   sided == Sided::Two ? Target::MiddleContent : Target::PopulationPercentile, sided);
    iv.lower_open = sided == Sided::Upper;
    iv.content_p = p;
    iv.point = quantile(future_sum_distribution(fit, U, fit.mu_hat, shape_or_one(fit)), 0.5);
    return iv;
}

// ===========================================================================
// counts and odds ratios

double kris_pvalue_upper(const FitResult& fit, double future_exposure, double x) {
    if (fit.family != FitFamily::QuasiPoisson) throw DomainError("count predictor needs a quasi-Poisson fit");
    const double Eo = fit.exposure_total;
    if (!(Eo > 0.0)) throw DomainError("count predictor needs the observed exposure");
    check_future(future_exposure);
    if (!(fit.mu_hat > 0.0)) throw InsufficientDataError("count predictor needs at least one observed event");
    const double phi = fit.phi_hat.value_or(1.0);
    const double X = fit.mu_hat * Eo;
    const double Ef = future_exposure;
    if (x < 0.0) return 0.0;
    const double z = (Ef * X - Eo * x) / std::sqrt(phi * Ef * Eo * (X + x));
    return special::normal_sf(z);
}

IntervalEstimate predict_count_kris(const FitResult& fit, double future_exposure, double level) {
    const auto [plo, phi] = tails(level, Sided::Two);
    const double point = fit.mu_hat * future_exposure;
    kris_pvalue_upper(fit, future_exposure, point);  // argument checks
    auto solve = [&](double target) {
        auto f = [&](double x) { return kris_pvalue_upper(fit, future_exposure, x) - target; };
        if (f(0.0) >= 0.0) return 0.0;
        auto [a, b] = numeric::expand_bracket(f, point, std::max(1.0, 0.1 * point), 0.0, kInf);
        return numeric::brent(f, a, b, 1e-10 * std::max(1.0, point));
    };
    auto iv = make(solve(plo), solve(phi), level, Method::KrisPengCount, Target::FutureSum, Sided::Two);
    iv.point = point;
    return with_rounded(iv);
}

IntervalEstimate predict_or(const FitResult& fit, long long n, long long m, double level, Reference ref, Sided sided) {
    if (fit.family != FitFamily::BinomialLogit) throw DomainError("odds-ratio prediction needs a binomial logit fit");
    if (n < 2) throw InsufficientDataError("odds-ratio prediction needs n >= 2");
    if (m < 1) throw DomainError("future sample size must be >= 1");
    const auto [plo, phi] = tails(level, sided);
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    const double se = std::sqrt(nn) * fit.se_g_mu() * std::sqrt(1.0 / nn + 1.0 / mm);
    const double df = nn - 1.0;
    const double lo = std::isnan(plo) ? 0.0 : std::exp(fit.mu_hat + reference_quantile(ref, df, plo) * se);
    const double hi = std::isnan(phi) ? kInf : std::exp(fit.mu_hat + reference_quantile(ref, df, phi) * se);
    auto iv = make(lo, hi, level, Method::ORPrediction, Target::ObservableEstimate, sided);
    iv.lower_open = std::isnan(plo);
    iv.point = std::exp(fit.mu_hat);
    return iv;
}

}  // namespace tolpred
