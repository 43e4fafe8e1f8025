#include "tolpred/fit.hpp"

#include "tolpred/dist.hpp"
#include "tolpred/errors.hpp"
#include "tolpred/numeric.hpp"
#include "tolpred/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tolpred {

using special::digamma;
using special::log_gamma;
using special::trigamma;

// ===========================================================================
// enums and links

std::string to_string(FitFamily f) {
    switch (f) {
        case FitFamily::Gamma: return "gamma";
        case FitFamily::QuasiPoisson: return "quasipoisson";
        case FitFamily::BinomialLogit: return "binomial_logit";
        case FitFamily::WeibullAFT: return "weibull";
    }
    return "unknown";
}

std::string to_string(Link l) {
    switch (l) {
        case Link::Identity: return "identity";
        case Link::Log: return "log";
        case Link::Logit: return "logit";
    }
    return "unknown";
}

std::string to_string(SeKind s) {
    switch (s) {
        case SeKind::Model: return "model";
        case SeKind::Sandwich: return "sandwich";
        case SeKind::Both: return "both";
    }
    return "unknown";
}

FitFamily family_from_string(const std::string& s) {
    if (s == "gamma") return FitFamily::Gamma;
    if (s == "quasipoisson" || s == "poisson") return FitFamily::QuasiPoisson;
    if (s == "binomial_logit" || s == "binomial") return FitFamily::BinomialLogit;
    if (s == "weibull") return FitFamily::WeibullAFT;
    throw DomainError("unknown family '" + s + "'");
}

Link link_from_string(const std::string& s) {
    if (s == "identity") return Link::Identity;
    if (s == "log") return Link::Log;
    if (s == "logit") return Link::Logit;
    throw DomainError("unknown link '" + s + "'");
}

SeKind se_kind_from_string(const std::string& s) {
    if (s == "model") return SeKind::Model;
    if (s == "sandwich") return SeKind::Sandwich;
    if (s == "both") return SeKind::Both;
    throw DomainError("unknown se kind '" + s + "'");
}

double link_apply(Link link, double mu) {
    switch (link) {
        case Link::Identity: return mu;
        case Link::Log:
            if (!(mu > 0.0)) throw DomainError("log link requires a positive argument");
            return std::log(mu);
        case Link::Logit:
            if (!(mu > 0.0 && mu < 1.0)) throw DomainError("logit link requires an argument in (0, 1)");
            return std::log(mu / (1.0 - mu));
    }
    return mu;
}

double link_inverse(Link link, double eta) {
    switch (link) {
        case Link::Identity: return eta;
        case Link::Log: return std::exp(eta);
        case Link::Logit: return 1.0 / (1.0 + std::exp(-eta));
    }
    return eta;
}

double link_derivative(Link link, double mu) {
    switch (link) {
        case Link::Identity: return 1.0;
        case Link::Log: return 1.0 / mu;
        case Link::Logit: return 1.0 / (mu * (1.0 - mu));
    }
    return 1.0;
}

// ===========================================================================
// FitResult

double FitResult::se_g_mu() const { return se_g_mu(se_kind); }

double FitResult::se_g_mu(SeKind kind) const {
    return kind == SeKind::Model ? se_g_mu_model : se_g_mu_sandwich;
}

double FitResult::weibull_scale() const {
    if (family != FitFamily::WeibullAFT || !k_hat) throw DomainError("weibull_scale needs a Weibull fit");
    return mu_hat / std::exp(log_gamma(1.0 + 1.0 / *k_hat));
}

double FitResult::survival_at(double t) const {
    if (t <= 0.0) return 1.0;
    return std::exp(-std::pow(t / weibull_scale(), *k_hat));
}

FitResult summary_fit(FitFamily family, Link link, double mu_hat, double se_g_mu, long long n_obs,
                      std::optional<double> k_hat, std::optional<double> phi_hat) {
    if (!(se_g_mu >= 0.0) || !std::isfinite(se_g_mu)) throw DomainError("summary_fit: SE must be finite and >= 0");
    if (k_hat && !(*k_hat > 0.0)) throw DomainError("summary_fit: shape must be > 0");
    if (phi_hat && !(*phi_hat > 0.0)) throw DomainError("summary_fit: dispersion must be > 0");
    FitResult f;
    f.family = family;
    f.link = link;
    f.mu_hat = mu_hat;
    f.k_hat = k_hat;
    f.phi_hat = phi_hat;
    f.se_g_mu_model = se_g_mu;
    f.se_g_mu_sandwich = se_g_mu;
    f.n_obs = n_obs;
    f.n_events = n_obs;
    if (family != FitFamily::BinomialLogit) {
        link_apply(link, mu_hat);
        const double se_mu = se_g_mu / link_derivative(link, mu_hat);
        f.cov_mu_k[0] = se_mu * se_mu;
    } else {
        f.cov_mu_k[0] = se_g_mu * se_g_mu;
    }
    return f;
}

// ===========================================================================
// gamma

double gamma_shape_from_rhs(double rhs) {
    if (!(rhs > 0.0) || !std::isfinite(rhs)) throw DegenerateDataError("gamma shape equation has no finite root");
    // Minka's closed-form approximation, then safeguarded Newton.
    double k = (3.0 - rhs + std::sqrt((rhs - 3.0) * (rhs - 3.0) + 24.0 * rhs)) / (12.0 * rhs);
    auto f = [rhs](double x) { return std::log(x) - digamma(x) - rhs; };
    double lo = k, hi = k;
    while (f(lo) < 0.0) lo *= 0.5;
    while (f(hi) > 0.0) hi *= 2.0;
    std::vector<double> trace;
    for (int it = 0; it < 100; ++it) {
        const double fk = f(k);
        trace.push_back(k);
        if (std::abs(fk) <= 1e-12 * std::max(1.0, rhs)) return k;
        if (fk > 0.0) lo = k;
        else hi = k;
        const double d = 1.0 / k - trigamma(k);
        double next = k - fk / d;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == k) return k;
        k = next;
    }
    throw ConvergenceError("gamma shape Newton iteration did not converge", trace);
}

double gamma_loglik(double mu, double k, long long n, double ybar, double mean_log) {
    return static_cast<double>(n) *
           (k * std::log(k) - k * std::log(mu) - log_gamma(k) + (k - 1.0) * mean_log - k * ybar / mu);
}

FitResult fit_gamma_intercept(const std::vector<double>& data, Link link, SeKind se_kind) {
    if (data.size() < 2) throw InsufficientDataError("gamma fit needs at least 2 observations");
    if (link == Link::Logit) throw DomainError("gamma fit supports identity and log links");
    for (double y : data) {
        if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("gamma data must be positive and finite");
    }
    const double n = static_cast<double>(data.size());
    const double ybar = std::accumulate(data.begin(), data.end(), 0.0) / n;
    double sum_log = 0.0, ss = 0.0;
    for (double y : data) {
        sum_log += std::log(y);
        ss += (y - ybar) * (y - ybar);
    }
    const double mean_log = sum_log / n;
    if (ss == 0.0) throw DegenerateDataError("all gamma observations are equal; shape is unbounded");
    const double rhs = std::log(ybar) - mean_log;
    if (!(rhs > 0.0)) throw DegenerateDataError("gamma data too close to constant to estimate the shape");

    // Newton from the method-of-moments start, within a bracket.
    double k = ybar * ybar / (ss / (n - 1.0));
    auto score = [rhs](double x) { return std::log(x) - digamma(x) - rhs; };
    double lo = k, hi = k;
    while (score(lo) < 0.0) lo *= 0.5;
    while (score(hi) > 0.0) hi *= 2.0;
    std::vector<double> trace;
    int it = 0;
    for (;; ++it) {
        if (it >= 100) throw ConvergenceError("gamma shape Newton iteration did not converge", trace);
        const double fk = score(k);
        trace.push_back(k);
        if (std::abs(fk) <= 1e-10) break;
        if (fk > 0.0) lo = k;
        else hi = k;
        double next = k - fk / (1.0 / k - trigamma(k));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        k = next;
    }

    FitResult f;
    f.family = FitFamily::Gamma;
    f.link = link;
    f.mu_hat = ybar;
    f.k_hat = k;
    f.n_obs = static_cast<long long>(data.size());
    f.n_events = f.n_obs;
    f.mean_log = mean_log;
    f.loglik = gamma_loglik(ybar, k, f.n_obs, ybar, mean_log);
    f.iterations = it;
    f.from_data = true;
    f.se_kind = se_kind == SeKind::Model ? SeKind::Model : SeKind::Sandwich;

    f.cov_mu_k[0] = ybar * ybar / (n * k);
    f.cov_mu_k[3] = 1.0 / (n * (trigamma(k) - 1.0 / k));
    f.se_k = std::sqrt(f.cov_mu_k[3]);

    const double se_log_model = 1.0 / std::sqrt(n * k);
    const double se_log_sandwich = std::sqrt(ss) / (n * ybar);
    const double scale = link == Link::Log ? 1.0 : ybar;
    f.se_g_mu_model = scale * se_log_model;
    f.se_g_mu_sandwich = scale * se_log_sandwich;
    return f;
}

// ===========================================================================
// quasi-Poisson

namespace {

constexpr double kPhiFloor = 1e-8;

double poisson_deviance_term(double x, double m) {
    const double t = x > 0.0 ? x * std::log(x / m) : 0.0;
    return 2.0 * (t - (x - m));
}

void check_counts(const std::vector<double>& events, const std::vector<double>& exposure) {
    if (events.size() != exposure.size()) throw DomainError("events and exposure lengths differ");
    if (events.empty()) throw InsufficientDataError("no observations");
    for (double x : events) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("event counts must be finite and >= 0");
    }
    for (double e : exposure) {
        if (!(e >= 0.0) || !std::isfinite(e)) throw DomainError("exposure must be finite and >= 0");
    }
}

}  // namespace

FitResult fit_quasipoisson(const std::vector<double>& events, const std::vector<double>& exposure, Link link) {
    check_counts(events, exposure);
    if (link == Link::Logit) throw DomainError("quasi-Poisson fit supports identity and log links");
    const double sx = std::accumulate(events.begin(), events.end(), 0.0);
    const double se = std::accumulate(exposure.begin(), exposure.end(), 0.0);
    if (!(se > 0.0)) throw DomainError("total exposure is zero");
    if (!(sx > 0.0)) throw InsufficientDataError("no events observed");
    if (events.size() < 2) throw InsufficientDataError("dispersion needs at least 2 observations");

    const double lam = sx / se;
    double dev = 0.0, rss = 0.0, ll = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const double m = lam * exposure[i];
        const double x = events[i];
        if (m == 0.0) {
            if (x > 0.0) throw DomainError("events recorded against zero exposure");
            continue;
        }
        dev += poisson_deviance_term(x, m);
        rss += (x - m) * (x - m);
        ll += x * std::log(m) - m - log_gamma(x + 1.0);
    }
    const double df = static_cast<double>(events.size()) - 1.0;
    const double phi = std::max(dev / df, kPhiFloor);

    FitResult f;
    f.family = FitFamily::QuasiPoisson;
    f.link = link;
    f.mu_hat = lam;
    f.phi_hat = phi;
    f.n_obs = static_cast<long long>(events.size());
    f.n_events = static_cast<long long>(std::llround(sx));
    f.exposure_total = se;
    f.events_total = sx;
    f.loglik = ll;
    f.from_data = true;
    f.cov_mu_k[0] = lam * lam * phi / sx;
    const double scale = link == Link::Log ? 1.0 : lam;
    f.se_g_mu_model = scale * std::sqrt(phi / sx);
    f.se_g_mu_sandwich = scale * std::sqrt(rss) / sx;
    return f;
}

// ===========================================================================
// single-regressor GLM by IRLS

double GlmFit::rate(double z) const { return link_inverse(link, coef[0] + coef[1] * z); }

namespace {

struct IrlsTerms {
    double U[2] = {0.0, 0.0};
    double I[4] = {0.0, 0.0, 0.0, 0.0};
    double M[4] = {0.0, 0.0, 0.0, 0.0};
    double deviance = 0.0;
    std::vector<double> fitted;
    long long bad_index = -1;
};

IrlsTerms irls_terms(FitFamily fam, Link link, const std::array<double, 2>& b, const std::vector<double>& y,
                     const std::vector<double>& E, const std::vector<double>& z) {
    IrlsTerms t;
    t.fitted.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = link_inverse(link, b[0] + b[1] * z[i]);
        if (!(r > 0.0) || !std::isfinite(r)) {
            t.bad_index = static_cast<long long>(i);
            return t;
        }
        const double m = E[i] * r;
        t.fitted[i] = m;
        if (m == 0.0) continue;
        const double v = fam == FitFamily::Gamma ? m * m : m;
        const double dm = link == Link::Log ? m : E[i];
        const double w = (y[i] - m) / v * dm;
        const double x[2] = {1.0, z[i]};
        for (int a = 0; a < 2; ++a) {
            t.U[a] += w * x[a];
            for (int c = 0; c < 2; ++c) {
                t.I[2 * a + c] += dm * dm / v * x[a] * x[c];
                t.M[2 * a + c] += w * w * x[a] * x[c];
            }
        }
        if (fam == FitFamily::Gamma) t.deviance += 2.0 * (-std::log(y[i] / m) + (y[i] - m) / m);
        else t.deviance += poisson_deviance_term(y[i], m);
    }
    return t;
}

std::array<double, 4> inverse2(const double* A) {
    const double det = A[0] * A[3] - A[1] * A[2];
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw DomainError("information matrix is singular");
    return {A[3] / det, -A[1] / det, -A[2] / det, A[0] / det};
}

std::array<double, 4> sandwich2(const std::array<double, 4>& Ai, const double* M) {
    // Ai * M * Ai
    double T[4];
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) T[2 * r + c] = Ai[2 * r] * M[c] + Ai[2 * r + 1] * M[2 + c];
    std::array<double, 4> out{};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out[2 * r + c] = T[2 * r] * Ai[c] + T[2 * r + 1] * Ai[2 + c];
    return out;
}

GlmFit irls(FitFamily fam, Link link, const std::vector<double>& y, const std::vector<double>& E,
            const std::vector<double>& z) {
    if (link == Link::Logit) throw DomainError("trend GLM supports identity and log links");
    if (y.size() != z.size() || y.size() != E.size()) throw DomainError("regressor length differs from response");
    if (y.size() < 3) throw InsufficientDataError("trend fit needs at least 3 observations");
    const double sy = std::accumulate(y.begin(), y.end(), 0.0);
    const double sE = std::accumulate(E.begin(), E.end(), 0.0);
    if (!(sE > 0.0)) throw DomainError("total exposure is zero");
    if (!(sy > 0.0)) throw InsufficientDataError("no events observed");

    GlmFit g;
    g.family = fam;
    g.link = link;
    g.n_obs = static_cast<long long>(y.size());
    std::array<double, 2> b{link_apply(link, sy / sE), 0.0};
    std::vector<double> trace;
    IrlsTerms t = irls_terms(fam, link, b, y, E, z);
    int it = 0;
    for (; it < 200; ++it) {
        const auto Ii = inverse2(t.I);
        const double step[2] = {Ii[0] * t.U[0] + Ii[1] * t.U[1], Ii[2] * t.U[0] + Ii[3] * t.U[1]};
        trace.push_back(b[0]);
        trace.push_back(b[1]);
        double scale = 1.0;
        std::array<double, 2> nb{};
        IrlsTerms nt;
        int halvings = 0;
        for (;; ++halvings) {
            nb = {b[0] + scale * step[0], b[1] + scale * step[1]};
            nt = irls_terms(fam, link, nb, y, E, z);
            const bool ok = nt.bad_index < 0 && std::isfinite(nt.deviance);
            if (ok && (nt.deviance <= t.deviance * (1.0 + 1e-12) + 1e-12 || halvings >= 40)) break;
            if (halvings >= 40) {
                throw ConstraintError("fitted mean is not positive at observation " +
                                      std::to_string(nt.bad_index + 1) + " for every feasible step");
            }
            scale *= 0.5;
        }
        const double change = std::max(std::abs(nb[0] - b[0]) / (1.0 + std::abs(b[0])),
                                       std::abs(nb[1] - b[1]) / (1.0 + std::abs(b[1])));
        b = nb;
        t = std::move(nt);
        if (change < 1e-13) break;
    }
    if (it >= 200) throw ConvergenceError("IRLS did not converge", trace);

    g.coef = b;
    g.iterations = it + 1;
    g.deviance = t.deviance;
    g.gradient_norm = std::hypot(t.U[0], t.U[1]);
    // gamma: Pearson dispersion, since deviance / df overstates 1/k by about 1/(6k)
    double disp = t.deviance;
    if (fam == FitFamily::Gamma) {
        disp = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) disp += std::pow((y[i] - t.fitted[i]) / t.fitted[i], 2);
    }
    g.phi = std::max(disp / static_cast<double>(y.size() - 2), kPhiFloor);
    const auto Ii = inverse2(t.I);
    for (int i = 0; i < 4; ++i) g.cov[i] = g.phi * Ii[i];
    g.cov_sandwich = sandwich2(Ii, t.M);
    g.fitted = t.fitted;
    return g;
}

}  // namespace

GlmFit fit_quasipoisson_glm(const std::vector<double>& events, const std::vector<double>& exposure,
                            const std::vector<double>& regressor, Link link) {
    check_counts(events, exposure);
    return irls(FitFamily::QuasiPoisson, link, events, exposure, regressor);
}

GlmFit fit_gamma_glm(const std::vector<double>& y, const std::vector<double>& regressor, Link link) {
    for (double v : y) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("gamma responses must be positive and finite");
    }
    const std::vector<double> ones(y.size(), 1.0);
    return irls(FitFamily::Gamma, link, y, ones, regressor);
}

// ===========================================================================
// binomial logit

namespace {

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double binom_loglik(const std::array<double, 4>& c, double b0, double b1) {
    const double pt = expit(b0 + b1), pc = expit(b0);
    auto xlog = [](double n, double p) { return n > 0.0 ? n * std::log(p) : 0.0; };
    return xlog(c[0], pt) + xlog(c[1], 1.0 - pt) + xlog(c[2], pc) + xlog(c[3], 1.0 - pc);
}

}  // namespace

FitResult fit_binomial_table(double a, double b, double c, double d, bool continuity_correction) {
    for (double v : {a, b, c, d}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("2x2 cell counts must be finite and >= 0");
    }
    if (a + b <= 0.0 || c + d <= 0.0) throw InsufficientDataError("both arms need at least one subject");
    const long long n_subjects = std::llround(a + b + c + d);
    if (a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0) {
        if (!continuity_correction) throw SeparationError("a 2x2 cell is zero: the odds ratio is not estimable");
        a += 0.5;
        b += 0.5;
        c += 0.5;
        d += 0.5;
    }
    const std::array<double, 4> cells{a, b, c, d};
    const double nt = a + b, nc = c + d;

    // Fisher scoring on (b0, b1) with logit(p_control) = b0, logit(p_treated) = b0 + b1.
    double b0 = 0.0, b1 = 0.0;
    std::vector<double> trace;
    int it = 0;
    double I[4] = {0, 0, 0, 0};
    for (;; ++it) {
        if (it >= 100) throw ConvergenceError("logistic IRLS did not converge", trace);
        const double pt = expit(b0 + b1), pc = expit(b0);
        const double ut = a - nt * pt, uc = c - nc * pc;
        const double U[2] = {ut + uc, ut};
        const double wt = nt * pt * (1.0 - pt), wc = nc * pc * (1.0 - pc);
        I[0] = wt + wc;
        I[1] = I[2] = wt;
        I[3] = wt;
        const auto Ii = inverse2(I);
        const double s0 = Ii[0] * U[0] + Ii[1] * U[1];
        const double s1 = Ii[2] * U[0] + Ii[3] * U[1];
        b0 += s0;
        b1 += s1;
        trace.push_back(b1);
        if (std::max(std::abs(s0), std::abs(s1)) < 1e-13 * (1.0 + std::abs(b1))) break;
    }
    {
        const double pt = expit(b0 + b1), pc = expit(b0);
        const double wt = nt * pt * (1.0 - pt), wc = nc * pc * (1.0 - pc);
        I[0] = wt + wc;
        I[1] = I[2] = wt;
        I[3] = wt;
    }
    const auto cov = inverse2(I);

    FitResult f;
    f.family = FitFamily::BinomialLogit;
    f.link = Link::Logit;
    f.mu_hat = b1;
    f.se_g_mu_model = std::sqrt(cov[3]);
    // For the saturated two-group model the robust and model-based
    // variances coincide.
    f.se_g_mu_sandwich = f.se_g_mu_model;
    f.se_kind = SeKind::Model;
    f.cov_mu_k[0] = cov[3];
    f.n_obs = n_subjects;
    f.n_events = std::llround(cells[0] + cells[2]);
    f.cells = cells;
    f.loglik = binom_loglik(cells, b0, b1);
    f.iterations = it + 1;
    f.from_data = true;
    return f;
}

FitResult fit_binomial_logit(const std::vector<int>& y, const std::vector<int>& trt, bool continuity_correction) {
    if (y.size() != trt.size()) throw DomainError("outcome and treatment lengths differ");
    double a = 0, b = 0, c = 0, d = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if ((y[i] != 0 && y[i] != 1) || (trt[i] != 0 && trt[i] != 1))
            throw DomainError("binomial outcome and treatment must be 0/1");
        if (trt[i] == 1) (y[i] ? a : b) += 1.0;
        else (y[i] ? c : d) += 1.0;
    }
    return fit_binomial_table(a, b, c, d, continuity_correction);
}

// ===========================================================================
// Weibull with right censoring

double weibull_loglik(const std::vector<SurvivalSample>& data, double scale, double shape) {
    double ll = 0.0;
    for (const auto& s : data) {
        const double z = s.time / scale;
        if (s.event) ll += std::log(shape / scale) + (shape - 1.0) * std::log(z);
        ll -= std::pow(z, shape);
    }
    return ll;
}

namespace {

struct WeibullSums {
    double d = 0.0;
    double sum_log_ev = 0.0;
    double log_tmax = 0.0;
};

WeibullSums weibull_sums(const std::vector<SurvivalSample>& data) {
    WeibullSums w;
    double tmax = 0.0;
    for (const auto& s : data) {
        if (!(s.time > 0.0) || !std::isfinite(s.time)) throw DomainError("survival times must be positive and finite");
        tmax = std::max(tmax, s.time);
        if (s.event) {
            w.d += 1.0;
            w.sum_log_ev += std::log(s.time);
        }
    }
    w.log_tmax = std::log(tmax);
    return w;
}

// log of sum t^k, and the t^k-weighted mean of log t, computed with times
// scaled by the maximum to avoid overflow.
std::pair<double, double> weighted_log_sums(const std::vector<SurvivalSample>& data, double k, double log_tmax) {
    double s = 0.0, sl = 0.0;
    for (const auto& x : data) {
        const double lt = std::log(x.time) - log_tmax;
        const double w = std::exp(k * lt);
        s += w;
        sl += w * lt;
    }
    return {std::log(s) + k * log_tmax, sl / s + log_tmax};
}

// scale maximizing the likelihood for a given shape
double weibull_scale_given_shape(const std::vector<SurvivalSample>& data, double k, const WeibullSums& w) {
    const double log_sum = weighted_log_sums(data, k, w.log_tmax).first;
    return std::exp((log_sum - std::log(w.d)) / k);
}

}  // namespace

FitResult fit_weibull_censored(const std::vector<SurvivalSample>& data, std::optional<double> fixed_shape) {
    if (data.empty()) throw InsufficientDataError("no survival data");
    const WeibullSums w = weibull_sums(data);
    if (w.d == 0.0) throw InsufficientDataError("all observations are censored");
    if (w.d < 2.0 && !fixed_shape) throw InsufficientDataError("Weibull fit needs at least 2 events");
    if (fixed_shape && !(*fixed_shape > 0.0)) throw DomainError("fixed Weibull shape must be > 0");

    double k;
    int iters = 0;
    if (fixed_shape) {
        k = *fixed_shape;
    } else {
        // profile score in log k is strictly decreasing
        auto score = [&](double lk) {
            ++iters;
            const double kk = std::exp(lk);
            const double mean_log_w = weighted_log_sums(data, kk, w.log_tmax).second;
            return w.d / kk + w.sum_log_ev - w.d * mean_log_w;
        };
        auto neg = [&](double lk) { return -score(lk); };
        auto [lo, hi] = numeric::expand_bracket(neg, 0.0, 0.5, -20.0, 20.0);
        k = std::exp(numeric::brent(neg, lo, hi, 1e-15));
    }
    const double lam = weibull_scale_given_shape(data, k, w);

    // observed information in (lambda, k)
    double su = 0.0, sul = 0.0, sul2 = 0.0;
    std::vector<std::array<double, 2>> scores;
    scores.reserve(data.size());
    for (const auto& x : data) {
        const double l = std::log(x.time / lam);
        const double u = std::exp(k * l);
        su += u;
        sul += u * l;
        sul2 += u * l * l;
        const double del = x.event ? 1.0 : 0.0;
        scores.push_back({k / lam * (u - del), del * (1.0 / k + l) - u * l});
    }
    const double d = w.d;
    const double H_ll = k / (lam * lam) * (d - su * (1.0 + k));
    const double H_lk = (-d + su + k * sul) / lam;
    const double H_kk = -d / (k * k) - sul2;

    const double g1 = std::exp(log_gamma(1.0 + 1.0 / k));
    const double mu = lam * g1;
    const double dmu_dk = -mu * digamma(1.0 + 1.0 / k) / (k * k);

    FitResult f;
    f.family = FitFamily::WeibullAFT;
    f.link = Link::Log;
    f.mu_hat = mu;
    f.k_hat = k;
    f.n_obs = static_cast<long long>(data.size());
    f.n_events = static_cast<long long>(d);
    f.loglik = weibull_loglik(data, lam, k);
    f.iterations = iters;
    f.survival = std::make_shared<const std::vector<SurvivalSample>>(data);
    f.shape_fixed = fixed_shape.has_value();
    f.from_data = true;

    if (fixed_shape) {
        const double var_l = 1.0 / -H_ll;
        double meat = 0.0;
        for (const auto& s : scores) meat += s[0] * s[0];
        f.cov_mu_k = {g1 * g1 * var_l, 0.0, 0.0, 0.0};
        f.se_g_mu_model = std::sqrt(var_l) / lam;
        f.se_g_mu_sandwich = std::sqrt(var_l * meat * var_l) / lam;
        f.se_k = 0.0;
        return f;
    }

    const double info[4] = {-H_ll, -H_lk, -H_lk, -H_kk};
    const auto C = inverse2(info);
    double M[4] = {0, 0, 0, 0};
    for (const auto& s : scores) {
        M[0] += s[0] * s[0];
        M[1] += s[0] * s[1];
        M[2] += s[1] * s[0];
        M[3] += s[1] * s[1];
    }
    const auto R = sandwich2(C, M);
    // delta map (lambda, k) -> (mu, k): J = [[g1, dmu_dk], [0, 1]]
    auto to_mu_k = [&](const std::array<double, 4>& V) {
        const double a = g1, b = dmu_dk;
        const double vm = a * a * V[0] + 2.0 * a * b * V[1] + b * b * V[3];
        const double cmk = a * V[1] + b * V[3];
        return std::array<double, 4>{vm, cmk, cmk, V[3]};
    };
    f.cov_mu_k = to_mu_k(C);
    const auto robust = to_mu_k(R);
    f.se_k = std::sqrt(f.cov_mu_k[3]);
    f.se_g_mu_model = std::sqrt(f.cov_mu_k[0]) / mu;
    f.se_g_mu_sandwich = std::sqrt(robust[0]) / mu;
    f.se_kind = SeKind::Model;
    return f;
}

// ===========================================================================
// Kaplan-Meier

double StepFunction::operator()(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return initial;
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

StepFunction km_estimator(const std::vector<SurvivalSample>& data) {
    if (data.empty()) throw InsufficientDataError("Kaplan-Meier needs at least one observation");
    std::vector<SurvivalSample> sorted = data;
    for (const auto& s : sorted) {
        if (!(s.time >= 0.0) || !std::isfinite(s.time)) throw DomainError("survival times must be finite and >= 0");
    }
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    StepFunction sfn;
    double surv = 1.0;
    std::size_t i = 0;
    const std::size_t n = sorted.size();
    while (i < n) {
        const double t = sorted[i].time;
        const double at_risk = static_cast<double>(n - i);
        double deaths = 0.0;
        std::size_t j = i;
        while (j < n && sorted[j].time == t) {
            if (sorted[j].event) deaths += 1.0;
            ++j;
        }
        if (deaths > 0.0) {
            surv *= 1.0 - deaths / at_risk;
            sfn.times.push_back(t);
            sfn.values.push_back(surv);
        }
        i = j;
    }
    return sfn;
}

// ===========================================================================
// profile likelihood

namespace {

double binom_profile_b0(const std::array<double, 4>& c, double b1) {
    // score in b0 is decreasing from (a + c) > 0 to -(b + d) < 0
    auto score = [&](double b0) {
        return (c[0] - (c[0] + c[1]) * expit(b0 + b1)) + (c[2] - (c[2] + c[3]) * expit(b0));
    };
    double lo = -1.0, hi = 1.0;
    while (score(lo) < 0.0) lo *= 2.0;
    while (score(hi) > 0.0) hi *= 2.0;
    return numeric::brent(score, lo, hi, 1e-14);
}

double weibull_profile_mu(const FitResult& fit, double mu) {
    const auto& data = *fit.survival;
    if (fit.shape_fixed) {
        const double k = *fit.k_hat;
        return weibull_loglik(data, mu / std::exp(log_gamma(1.0 + 1.0 / k)), k);
    }
    auto ll = [&](double lk) {
        const double k = std::exp(lk);
        return weibull_loglik(data, mu / std::exp(log_gamma(1.0 + 1.0 / k)), k);
    };
    // golden-section on log k around the unconstrained estimate
    const double c0 = std::log(*fit.k_hat);
    double a = c0 - 3.0, b = c0 + 3.0;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = ll(x1), f2 = ll(x2);
    while (b - a > 1e-11) {
        if (f1 > f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - r * (b - a); f1 = ll(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + r * (b - a); f2 = ll(x2);
        }
    }
    return ll(0.5 * (a + b));
}

}  // namespace

double profile_deviance(const FitResult& fit, Param param, double value) {
    if (!fit.from_data) throw DomainError("profile likelihood needs a fit computed from data");
    switch (fit.family) {
        case FitFamily::Gamma: {
            if (!(value > 0.0)) throw DomainError("gamma parameters must be positive");
            const double ybar = fit.mu_hat;
            if (param == Param::Mu) {
                const double rhs = std::log(value) + ybar / value - 1.0 - fit.mean_log;
                const double k = gamma_shape_from_rhs(rhs);
                return 2.0 * (fit.loglik - gamma_loglik(value, k, fit.n_obs, ybar, fit.mean_log));
            }
            return 2.0 * (fit.loglik - gamma_loglik(ybar, value, fit.n_obs, ybar, fit.mean_log));
        }
        case FitFamily::QuasiPoisson: {
            if (param == Param::K) throw DomainError("quasi-Poisson fit has no shape parameter");
            if (!(value > 0.0)) throw DomainError("rate must be positive");
            const double lam = fit.mu_hat;
            const double dev = 2.0 * (fit.events_total * std::log(lam / value) - (lam - value) * fit.exposure_total);
            return dev / *fit.phi_hat;
        }
        case FitFamily::BinomialLogit: {
            if (param == Param::K) throw DomainError("binomial fit has no shape parameter");
            const double b0 = binom_profile_b0(fit.cells, value);
            return 2.0 * (fit.loglik - binom_loglik(fit.cells, b0, value));
        }
        case FitFamily::WeibullAFT: {
            if (!(value > 0.0)) throw DomainError("Weibull parameters must be positive");
            if (param == Param::Mu) return 2.0 * (fit.loglik - weibull_profile_mu(fit, value));
            if (fit.shape_fixed) throw DomainError("shape was fixed in this fit");
            const WeibullSums w = weibull_sums(*fit.survival);
            const double lam = weibull_scale_given_shape(*fit.survival, value, w);
            return 2.0 * (fit.loglik - weibull_loglik(*fit.survival, lam, value));
        }
    }
    return 0.0;
}

IntervalEstimate profile_lr_ci(const FitResult& fit, Param param, double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
    if (param == Param::K && !fit.k_hat) throw DomainError("fit has no shape parameter");
    const double target = std::pow(special::normal_quantile(0.5 + 0.5 * level), 2);
    const bool additive = fit.family == FitFamily::BinomialLogit;
    const double est = param == Param::Mu ? fit.mu_hat : *fit.k_hat;

    auto value_at = [&](double s) { return additive ? est + s : est * std::exp(s); };
    auto excess = [&](double s) {
        const double d = profile_deviance(fit, param, value_at(s));
        return std::isfinite(d) ? d - target : std::numeric_limits<double>::max();
    };

    IntervalEstimate out;
    out.level = level;
    out.method = Method::ProfileLRCI;
    out.target = Target::Parameter;
    auto endpoint = [&](double dir, bool& open) {
        // deviance at the estimate can exceed a vanishing target by rounding
        if (excess(0.0) >= 0.0) return value_at(0.0);
        double s = 0.05 * dir, prev = 0.0;
        for (int i = 0; i < 60; ++i) {
            double e;
            try {
                e = excess(s);
            } catch (const DegenerateDataError&) {
                e = std::numeric_limits<double>::max();
            }
            if (e >= 0.0) {
                return value_at(numeric::brent(excess, prev, s, 1e-12));
            }
            prev = s;
            s *= 1.6;
            if (std::abs(s) > 60.0) break;
        }
        open = true;
        return additive ? dir * std::numeric_limits<double>::infinity() : (dir < 0 ? 0.0 : std::numeric_limits<double>::infinity());
    };
    out.lower = endpoint(-1.0, out.lower_open);
    out.upper = endpoint(1.0, out.upper_open);
    out.point = est;
    if (out.lower_open != out.upper_open) out.sided = out.lower_open ? Sided::Upper : Sided::Lower;
    if (additive && param == Param::Mu) {
        out.lower = std::exp(out.lower);
        out.upper = std::exp(out.upper);
        out.point = std::exp(est);
    }
    return out;
}

IntervalEstimate wald_ci(const FitResult& fit, double level, std::optional<SeKind> kind) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
    const double z = special::normal_quantile(0.5 + 0.5 * level);
    const double se = kind ? fit.se_g_mu(*kind) : fit.se_g_mu();
    IntervalEstimate out;
    out.level = level;
    out.method = Method::WaldCI;
    out.target = Target::Parameter;
    if (fit.family == FitFamily::BinomialLogit) {
        out.lower = std::exp(fit.mu_hat - z * se);
        out.upper = std::exp(fit.mu_hat + z * se);
        out.point = std::exp(fit.mu_hat);
        return out;
    }
    const double g = link_apply(fit.link, fit.mu_hat);
    out.lower = link_inverse(fit.link, g - z * se);
    out.upper = link_inverse(fit.link, g + z * se);
    out.point = fit.mu_hat;
    return out;
}

double natural_point(const FitResult& fit) {
    return fit.family == FitFamily::BinomialLogit ? std::exp(fit.mu_hat) : fit.mu_hat;
}

}  // namespace tolpred
