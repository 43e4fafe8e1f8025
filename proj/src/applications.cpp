#include "tolpred/applications.hpp"

#include "tolpred/dist.hpp"
#include "tolpred/errors.hpp"
#include "tolpred/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tolpred {

namespace {

double z_two(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
    return special::normal_quantile(0.5 + 0.5 * level);
}

double quad(const std::array<double, 4>& C, const std::array<double, 2>& a) {
    return a[0] * a[0] * C[0] + 2.0 * a[0] * a[1] * C[1] + a[1] * a[1] * C[3];
}

IntervalEstimate log_interval(double point, double se, double c, double level, Method m, Target t) {
    IntervalEstimate iv;
    iv.lower = point * std::exp(-c * se);
    iv.upper = point * std::exp(c * se);
    iv.level = level;
    iv.method = m;
    iv.target = t;
    iv.point = point;
    return iv;
}

}  // namespace

// ===========================================================================
// series

void RecruitmentSeries::validate() const {
    const std::size_t d = events.size();
    if (d == 0) throw InsufficientDataError("recruitment series is empty");
    if (exposure_days.size() != d || active_sites.size() != d)
        throw DomainError("recruitment series columns differ in length");
    for (std::size_t l = 0; l < d; ++l) {
        if (!(events[l] >= 0.0) || !std::isfinite(events[l]))
            throw DomainError("events must be >= 0 (period " + std::to_string(l + 1) + ")");
        if (!(exposure_days[l] >= 0.0) || !(active_sites[l] >= 0.0))
            throw DomainError("exposure and active sites must be >= 0 (period " + std::to_string(l + 1) + ")");
    }
    if (!future_exposure_days.empty() && future_exposure_days.size() != future_sites.size())
        throw DomainError("future schedule columns differ in length");
    for (double s : future_sites)
        if (!(s >= 0.0)) throw DomainError("future active sites must be >= 0");
}

double RecruitmentSeries::site_days() const {
    double s = 0.0;
    for (std::size_t l = 0; l < events.size(); ++l) s += exposure_days[l] * active_sites[l];
    return s;
}

double RecruitmentSeries::future_site_days() const {
    double s = 0.0;
    for (std::size_t l = 0; l < future_sites.size(); ++l)
        s += future_sites[l] * (future_exposure_days.empty() ? 1.0 : future_exposure_days[l]);
    return s;
}

// ===========================================================================
// site days

FitResult site_day_fit(const RecruitmentSeries& series) {
    series.validate();
    std::vector<double> x, e;
    for (std::size_t l = 0; l < series.periods(); ++l) {
        const double sd = series.exposure_days[l] * series.active_sites[l];
        if (sd == 0.0) {
            if (series.events[l] > 0.0)
                throw DomainError("events recorded with no active site-days (period " + std::to_string(l + 1) + ")");
            continue;
        }
        x.push_back(series.events[l]);
        e.push_back(sd);
    }
    if (e.empty()) throw DomainError("no active site-days");
    auto fit = fit_quasipoisson(x, e, Link::Log);
    fit.se_kind = SeKind::Sandwich;
    return fit;
}

IntervalEstimate predict_sitedays(const FitResult& fit, const RecruitmentSeries& series, double level,
                                  const PivotOptions& opt) {
    if (series.future_sites.empty()) throw ConfigError("site-day prediction needs a future site schedule");
    const double future = series.future_site_days();
    if (!(future > 0.0)) throw DomainError("future schedule has no site-days");
    PivotOptions o = opt;
    o.count_variance = CountVariance::ExposureScaled;
    // the sandwich over a few dozen unequal periods runs small; the
    // quasi-Poisson SE already carries the overdispersion
    if (!o.se_kind) o.se_kind = SeKind::Model;
    if (!o.reference) o.reference = Reference::StudentT;
    return predict_sum_link(fit, {fit.n_obs, future}, level, o);
}

StationarityDiagnostic stationarity(const RecruitmentSeries& series) {
    const auto fit = site_day_fit(series);
    StationarityDiagnostic d;
    long long used = 0;
    for (std::size_t l = 0; l < series.periods(); ++l) {
        const double m = fit.mu_hat * series.exposure_days[l] * series.active_sites[l];
        if (m <= 0.0) continue;
        d.pearson += (series.events[l] - m) * (series.events[l] - m) / m;
        ++used;
    }
    d.df = used - 1;
    if (d.df < 1) throw InsufficientDataError("stationarity check needs two periods with site-days");
    d.ratio = d.pearson / d.df;
    d.p_value = sf(DistSpec::chi_square(static_cast<double>(d.df)), d.pearson);
    return d;
}

// ===========================================================================
// trends

double RegressorTransform::apply(double l) const {
    if (!(l > 0.0)) throw DomainError("periods start at 1");
    switch (kind) {
        case Kind::LogPeriod: return std::log(l);
        case Kind::Root:
            if (!(root > 0.0)) throw DomainError("root order must be > 0");
            return std::pow(l, 1.0 / root);
        case Kind::Identity: return l;
    }
    return l;
}

double TrendFit::mean_at(int l, Extrapolation ex) const {
    const int ll = ex == Extrapolation::Constant ? std::min(l, last_period) : l;
    return unit_exposure * glm.rate(transform.apply(ll));
}

std::array<double, 2> TrendFit::gradient_at(int l, Extrapolation ex) const {
    const int ll = ex == Extrapolation::Constant ? std::min(l, last_period) : l;
    const double z = transform.apply(ll);
    const double scale = glm.link == Link::Log ? mean_at(l, ex) : unit_exposure;
    if (glm.link == Link::Logit) throw DomainError("trend fits support identity and log links");
    return {scale, scale * z};
}

TrendFit fit_trend(const RecruitmentSeries& series, RegressorTransform transform, Link link, int first, int last) {
    series.validate();
    const int d = static_cast<int>(series.periods());
    if (last == 0) last = d;
    if (first < 1 || last > d || last - first + 1 < 3) throw InsufficientDataError("trend fit needs >= 3 periods");
    std::vector<double> x, e, z;
    for (int l = first; l <= last; ++l) {
        x.push_back(series.events[l - 1]);
        e.push_back(series.exposure_days[l - 1]);
        z.push_back(transform.apply(l));
    }
    TrendFit t;
    try {
        t.glm = fit_quasipoisson_glm(x, e, z, link);
    } catch (const ConstraintError& err) {
        throw ConstraintError(std::string(err.what()) + " (fit window starts at period " + std::to_string(first) + ")");
    }
    t.transform = transform;
    t.first_period = first;
    t.last_period = last;
    t.unit_exposure = std::accumulate(e.begin(), e.end(), 0.0) / e.size();
    return t;
}

TrendFit fit_interarrival_trend(const std::vector<double>& y, RegressorTransform transform, Link link) {
    if (y.size() < 3) throw InsufficientDataError("trend fit needs >= 3 observations");
    std::vector<double> z;
    for (std::size_t i = 0; i < y.size(); ++i) z.push_back(transform.apply(static_cast<double>(i + 1)));
    TrendFit t;
    t.glm = fit_gamma_glm(y, z, link);
    t.transform = transform;
    t.first_period = 1;
    t.last_period = static_cast<int>(y.size());
    t.unit_exposure = 1.0;
    return t;
}

namespace {

struct SumMoments {
    double total = 0.0;
    double sum_sq = 0.0;  // sum of squared means
    std::array<double, 2> grad{0.0, 0.0};
};

SumMoments sum_moments(const TrendFit& t, int from, int to, Extrapolation ex) {
    if (to < from) throw DomainError("empty period range");
    if (from < 1) throw DomainError("periods start at 1");
    SumMoments s;
    for (int l = from; l <= to; ++l) {
        const double m = t.mean_at(l, ex);
        if (!(m > 0.0)) throw DomainError("extrapolated mean is not positive at period " + std::to_string(l));
        s.total += m;
        s.sum_sq += m * m;
        const auto g = t.gradient_at(l, ex);
        s.grad[0] += g[0];
        s.grad[1] += g[1];
    }
    return s;
}

double count_sum_se(const TrendFit& t, const SumMoments& s) {
    return std::sqrt(quad(t.glm.cov, s.grad) / (s.total * s.total) + t.glm.phi / s.total);
}

}  // namespace

IntervalEstimate predict_rate_at(const TrendFit& trend, int l, double level, Extrapolation ex) {
    return predict_sum_rate(trend, l, l, level, ex);
}

IntervalEstimate predict_sum_rate(const TrendFit& trend, int from, int to, double level, Extrapolation ex) {
    const auto s = sum_moments(trend, from, to, ex);
    auto iv = log_interval(s.total, count_sum_se(trend, s), z_two(level), level, Method::LinkPivot, Target::FutureSum);
    return with_rounded(iv);
}

double pvalue_sum_rate(const TrendFit& trend, int from, int to, double y, Extrapolation ex) {
    if (!(y > 0.0)) return 0.0;
    const auto s = sum_moments(trend, from, to, ex);
    return special::normal_cdf((std::log(y) - std::log(s.total)) / count_sum_se(trend, s));
}

IntervalEstimate predict_sum_interarrival(const TrendFit& trend, int from, int to, double level) {
    if (trend.glm.family != FitFamily::Gamma) throw DomainError("interarrival prediction needs a gamma trend fit");
    const auto s = sum_moments(trend, from, to, Extrapolation::Model);
    const double v = quad(trend.glm.cov, s.grad) / (s.total * s.total) + trend.glm.phi * s.sum_sq / (s.total * s.total);
    const double n = static_cast<double>(trend.glm.n_obs);
    if (n < 2) throw InsufficientDataError("t reference needs n >= 2");
    const double t = student_t_quantile(0.5 + 0.5 * level, n - 1.0);
    return log_interval(s.total, std::sqrt(v), t, level, Method::LinkPivot,
                        from == to ? Target::FutureObservation : Target::FutureSum);
}

HorizonResult solve_target_window(const TrendFit& trend, double target, double level, int max_horizon,
                                  Extrapolation ex) {
    HorizonResult r;
    if (target <= 0.0) return r;
    if (max_horizon < 1) throw DomainError("max horizon must be >= 1");
    const int d = trend.last_period;
    const double z = z_two(level);
    auto point = [&](int h) { return sum_moments(trend, d + 1, d + h, ex).total; };
    if (point(max_horizon) < target)
        throw HorizonExceededError("target not reached within " + std::to_string(max_horizon) + " periods");
    // the cumulative mean is increasing in h: bisect on integers
    int lo = 0, hi = max_horizon;
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (point(mid) >= target ? hi : lo) = mid;
    }
    r.point = hi;
    // limits: scan, as their monotonicity is only approximate
    r.optimistic = r.pessimistic = -1;
    for (int h = 1; h <= max_horizon && r.pessimistic < 0; ++h) {
        const auto s = sum_moments(trend, d + 1, d + h, ex);
        const double se = count_sum_se(trend, s);
        if (r.optimistic < 0 && s.total * std::exp(z * se) >= target) r.optimistic = h;
        if (s.total * std::exp(-z * se) >= target) r.pessimistic = h;
    }
    if (r.pessimistic < 0)
        throw HorizonExceededError("lower prediction limit does not reach the target within " +
                                   std::to_string(max_horizon) + " periods");
    return r;
}

// ===========================================================================
// pivot combination

IntervalEstimate combine_link_pivots(const std::vector<PivotTerm>& terms, double level) {
    if (terms.empty()) throw DomainError("no pivots to combine");
    double total = 0.0, var = 0.0;
    for (const auto& t : terms) {
        if (!(t.point > 0.0) || !(t.se_log >= 0.0)) throw DomainError("pivot terms need point > 0 and se >= 0");
        total += t.sign * t.point;
        var += std::pow(t.point * t.se_log, 2);
    }
    if (!(total > 0.0)) throw DomainError("combined point prediction must be positive for a log-scale pivot");
    return log_interval(total, std::sqrt(var) / total, z_two(level), level, Method::LinkPivot, Target::FutureSum);
}

// ===========================================================================
// Weibull

std::vector<BandPoint> weibull_bands(const FitResult& fit, const std::vector<double>& p_grid, WeibullBand band,
                                     double level) {
    if (fit.family != FitFamily::WeibullAFT || !fit.k_hat) throw DomainError("Weibull bands need a Weibull fit");
    if (fit.n_obs < 2) throw InsufficientDataError("bands need n >= 2");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
    double inflate = 1.0;
    if (band.kind == WeibullBand::Kind::RepeatedExperiment) {
        if (band.future_events < 1) throw DomainError("future events must be >= 1");
        const double n = static_cast<double>(fit.n_events);
        if (!(n > 0.0)) throw InsufficientDataError("no events observed");
        inflate = std::sqrt(n) * std::sqrt(1.0 / n + 1.0 / static_cast<double>(band.future_events));
    }
    const double t = student_t_quantile(0.5 + 0.5 * level, static_cast<double>(fit.n_obs - 1));
    const DistSpec one = future_sum_distribution(fit, 1.0, fit.mu_hat, *fit.k_hat);
    std::vector<BandPoint> out;
    for (double p : p_grid) {
        if (!(p > 0.0 && p < 1.0)) throw DomainError("band probabilities must lie in (0, 1)");
        BandPoint b;
        b.p = p;
        b.estimate = quantile(one, p);
        const double se = inflate * delta_quantile_se(fit, p, 1.0, Link::Log);
        b.interval = log_interval(b.estimate, se, t, level,
                                  band.kind == WeibullBand::Kind::PopulationTolerance ? Method::DeltaTolerance
                                                                                      : Method::LinkPivot,
                                  band.kind == WeibullBand::Kind::PopulationTolerance ? Target::PopulationPercentile
                                                                                      : Target::ObservableEstimate);
        b.interval.content_p = p;
        out.push_back(b);
    }
    return out;
}

IntervalEstimate weibull_subject_prediction(const FitResult& fit, double level, bool profile_ci) {
    if (fit.family != FitFamily::WeibullAFT) throw DomainError("subject prediction needs a Weibull fit");
    const auto ci = profile_ci && fit.from_data ? profile_lr_ci(fit, Param::Mu, level) : wald_ci(fit, level);
    return predict_sum_plugci(fit, {fit.n_obs, 1.0}, level, ci);
}

}  // namespace tolpred
