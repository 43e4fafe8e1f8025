#include "tolpred/dist.hpp"

#include "tolpred/errors.hpp"
#include "tolpred/numeric.hpp"
#include "tolpred/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tolpred {

using special::log_gamma;
using special::normal_cdf;
using special::normal_quantile;
using special::normal_sf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
    if (!ok) throw DomainError(msg);
}

void check_probability(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile requires 0 < p < 1");
}

// ---------------------------------------------------------------------------
// Student t and noncentral t

std::pair<double, double> student_t_cdf_sf(double x, double df) {
    if (std::isnan(x)) throw DomainError("student t cdf: x is NaN");
    if (x == 0.0) return {0.5, 0.5};
    if (std::isinf(x)) return x > 0 ? std::pair{1.0, 0.0} : std::pair{0.0, 1.0};
    if (df > 1e10) return {normal_cdf(x), normal_sf(x)};
    const double x2 = x * x;
    const double z = df / (df + x2);
    const double y = x2 / (df + x2);
    const double tail = 0.5 * special::beta_inc_pair(0.5 * df, 0.5, z, y).first;
    return x > 0 ? std::pair{1.0 - tail, tail} : std::pair{tail, 1.0 - tail};
}

// Scaled-chi mixing density of S = sqrt(V/df), V ~ chi-square(df).
struct ScaledChi {
    double df;
    double log_const;
    explicit ScaledChi(double df_) : df(df_) {
        log_const = std::numbers::ln2 + 0.5 * df * std::log(0.5 * df) - log_gamma(0.5 * df);
    }
    double log_pdf(double s) const { return log_const + (df - 1.0) * std::log(s) - 0.5 * df * s * s; }
    double mode() const { return df > 1.0 ? std::sqrt((df - 1.0) / df) : 0.0; }
};

// Integral of g(s) f_S(s) over s > 0 for a bounded smooth weight g. Near zero
// the substitution s = r^(1/df) absorbs the s^(df-1) factor.
template <class G>
double mix_over_scaled_chi(double df, const G& g, std::vector<double> breaks) {
    const ScaledChi chi(df);
    const double mode = chi.mode();
    const double a = df > 1.0 ? 0.5 * mode : 0.5;

    double s_hi = std::max(1.0, mode);
    while (chi.log_pdf(s_hi) > -80.0) s_hi += std::max(0.25, 1.0 / std::sqrt(df));

    const double log_head = chi.log_const - std::log(df);
    auto head = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double s = std::pow(r, 1.0 / df);
        return std::exp(log_head - 0.5 * df * s * s) * g(s);
    };
    auto body = [&](double s) { return std::exp(chi.log_pdf(s)) * g(s); };

    double total = 0.0;
    const double r_hi = std::pow(a, df);
    if (r_hi > 0.0) total += numeric::integrate(head, 0.0, r_hi, 1e-15, 1e-13).value;

    breaks.push_back(mode);
    std::vector<double> pts{a};
    for (double b : breaks)
        if (b > a && b < s_hi) pts.push_back(b);
    pts.push_back(s_hi);
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] > pts[i]) total += numeric::integrate(body, pts[i], pts[i + 1], 1e-15, 1e-13).value;
    }
    return total;
}

std::pair<double, double> nct_cdf_sf(double x, double df, double nc) {
    require(df > 0.0, "noncentral t requires df > 0");
    if (std::isnan(x) || std::isnan(nc)) throw DomainError("noncentral t: NaN argument");
    if (nc == 0.0) return student_t_cdf_sf(x, df);
    if (std::isinf(x)) return x > 0 ? std::pair{1.0, 0.0} : std::pair{0.0, 1.0};
    if (df > 1e8) return {normal_cdf(x - nc), normal_sf(x - nc)};
    std::vector<double> breaks;
    if (x != 0.0 && nc / x > 0.0) breaks.push_back(nc / x);
    auto lower_tail = [&] { return mix_over_scaled_chi(df, [&](double s) { return normal_cdf(x * s - nc); }, breaks); };
    auto upper_tail = [&] { return mix_over_scaled_chi(df, [&](double s) { return normal_sf(x * s - nc); }, breaks); };
    // Integrate the tail that is probably the smaller one; the complement is
    // only integrated separately when the guess was wrong.
    double lower, upper;
    if (x < nc) {
        lower = lower_tail();
        upper = lower <= 0.5 ? 1.0 - lower : upper_tail();
    } else {
        upper = upper_tail();
        lower = upper <= 0.5 ? 1.0 - upper : lower_tail();
    }
    return {std::clamp(lower, 0.0, 1.0), std::clamp(upper, 0.0, 1.0)};
}

double nct_pdf(double x, double df, double nc) {
    std::vector<double> breaks;
    if (x != 0.0 && nc / x > 0.0) breaks.push_back(nc / x);
    return mix_over_scaled_chi(df, [&](double s) { return s * special::normal_pdf(x * s - nc); }, breaks);
}

// ---------------------------------------------------------------------------
// generic continuous inversion

template <class CdfSf>
double invert_continuous(const CdfSf& cdf_sf, double p, double guess, double step, double min_x,
                         double max_x, double xtol) {
    numeric::Fn f;
    if (p <= 0.5) {
        f = [&](double x) { return cdf_sf(x).first - p; };
    } else {
        const double q = 1.0 - p;
        f = [&, q](double x) { return q - cdf_sf(x).second; };
    }
    auto [a, b] = numeric::expand_bracket(f, guess, step, min_x, max_x);
    if (a == b) return a;
    return numeric::brent(f, a, b, xtol);
}

double gamma_guess(double shape, double p) {
    const double z = normal_quantile(p);
    const double c = 1.0 / (9.0 * shape);
    const double w = 1.0 - c + z * std::sqrt(c);
    double g = shape * w * w * w;
    if (!(g > 0.0)) {
        // lower tail of small shapes: P(a, x) ~ x^a / Gamma(a + 1)
        g = std::exp((std::log(p) + log_gamma(shape + 1.0)) / shape);
    }
    return g;
}

// ---------------------------------------------------------------------------
// samplers

double std_normal(RngStream& rng) { return normal_quantile(rng.uniform()); }

double std_gamma(double k, RngStream& rng) {
    if (k < 1.0) {
        const double g = std_gamma(k + 1.0, rng);
        return g * std::exp(std::log(rng.uniform()) / k);
    }
    const double d = k - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = std_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double discrete_upper(const DistSpec& d) {
    return d.family == Family::Binomial ? d.p1 : kInf;
}

}  // namespace

// ---------------------------------------------------------------------------
// DistSpec

std::string to_string(Family f) {
    switch (f) {
        case Family::Normal: return "normal";
        case Family::StudentT: return "student_t";
        case Family::NoncentralT: return "noncentral_t";
        case Family::ChiSquare: return "chi_square";
        case Family::F: return "f";
        case Family::Gamma: return "gamma";
        case Family::Exponential: return "exponential";
        case Family::Poisson: return "poisson";
        case Family::Binomial: return "binomial";
        case Family::Weibull: return "weibull";
    }
    return "unknown";
}

DistSpec DistSpec::normal(double mean, double sd) { return {Family::Normal, mean, sd}; }
DistSpec DistSpec::student_t(double df) { return {Family::StudentT, df, 0.0}; }
DistSpec DistSpec::noncentral_t(double df, double nc) { return {Family::NoncentralT, df, nc}; }
DistSpec DistSpec::chi_square(double df) { return {Family::ChiSquare, df, 0.0}; }
DistSpec DistSpec::f(double df1, double df2) { return {Family::F, df1, df2}; }
DistSpec DistSpec::gamma(double shape, double scale) { return {Family::Gamma, shape, scale}; }
DistSpec DistSpec::gamma_mean_shape(double mean, double shape) { return {Family::Gamma, shape, mean / shape}; }
DistSpec DistSpec::exponential(double mean) { return {Family::Exponential, mean, 0.0}; }
DistSpec DistSpec::poisson(double lambda) { return {Family::Poisson, lambda, 0.0}; }
DistSpec DistSpec::binomial(long long n, double prob) { return {Family::Binomial, static_cast<double>(n), prob}; }
DistSpec DistSpec::weibull(double shape, double scale) { return {Family::Weibull, shape, scale}; }

void DistSpec::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    switch (family) {
        case Family::Normal:
            require(finite(p1) && p2 > 0.0 && finite(p2), "normal requires finite mean and sd > 0");
            break;
        case Family::StudentT:
        case Family::ChiSquare:
            require(p1 > 0.0 && !std::isnan(p1), "degrees of freedom must be > 0");
            break;
        case Family::NoncentralT:
            require(p1 > 0.0 && !std::isnan(p1), "degrees of freedom must be > 0");
            require(finite(p2), "noncentrality must be finite");
            break;
        case Family::F:
            require(p1 > 0.0 && p2 > 0.0 && finite(p1) && finite(p2), "F requires df1 > 0 and df2 > 0");
            break;
        case Family::Gamma:
        case Family::Weibull:
            require(p1 > 0.0 && p2 > 0.0 && finite(p1) && finite(p2), "shape and scale must be > 0");
            break;
        case Family::Exponential:
            require(p1 > 0.0 && finite(p1), "exponential mean must be > 0");
            break;
        case Family::Poisson:
            require(p1 >= 0.0 && finite(p1), "poisson mean must be >= 0");
            break;
        case Family::Binomial:
            require(p1 >= 1.0 && std::floor(p1) == p1 && finite(p1), "binomial n must be an integer >= 1");
            require(p2 >= 0.0 && p2 <= 1.0, "binomial probability must lie in [0, 1]");
            break;
    }
}

double DistSpec::mean() const {
    validate();
    switch (family) {
        case Family::Normal: return p1;
        case Family::StudentT:
            require(p1 > 1.0, "student t mean requires df > 1");
            return 0.0;
        case Family::NoncentralT:
            require(p1 > 1.0, "noncentral t mean requires df > 1");
            return p2 * std::sqrt(0.5 * p1) * std::exp(log_gamma(0.5 * (p1 - 1.0)) - log_gamma(0.5 * p1));
        case Family::ChiSquare: return p1;
        case Family::F:
            require(p2 > 2.0, "F mean requires df2 > 2");
            return p2 / (p2 - 2.0);
        case Family::Gamma: return p1 * p2;
        case Family::Exponential: return p1;
        case Family::Poisson: return p1;
        case Family::Binomial: return p1 * p2;
        case Family::Weibull: return p2 * std::exp(log_gamma(1.0 + 1.0 / p1));
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// cdf / sf

namespace {

std::pair<double, double> cdf_sf(const DistSpec& d, double x) {
    if (std::isnan(x)) throw DomainError("cdf: x is NaN");
    switch (d.family) {
        case Family::Normal: {
            const double z = (x - d.p1) / d.p2;
            return {normal_cdf(z), normal_sf(z)};
        }
        case Family::StudentT: return student_t_cdf_sf(x, d.p1);
        case Family::NoncentralT: return nct_cdf_sf(x, d.p1, d.p2);
        case Family::ChiSquare:
            if (x <= 0.0) return {0.0, 1.0};
            return {special::gamma_p(0.5 * d.p1, 0.5 * x), special::gamma_q(0.5 * d.p1, 0.5 * x)};
        case Family::Gamma:
            if (x <= 0.0) return {0.0, 1.0};
            return {special::gamma_p(d.p1, x / d.p2), special::gamma_q(d.p1, x / d.p2)};
        case Family::Exponential: {
            if (x <= 0.0) return {0.0, 1.0};
            const double r = x / d.p1;
            return {-std::expm1(-r), std::exp(-r)};
        }
        case Family::Weibull: {
            if (x <= 0.0) return {0.0, 1.0};
            const double h = std::pow(x / d.p2, d.p1);
            return {-std::expm1(-h), std::exp(-h)};
        }
        case Family::F: {
            if (x <= 0.0) return {0.0, 1.0};
            if (std::isinf(x)) return {1.0, 0.0};
            const double a = d.p1 * x;
            const double den = a + d.p2;
            return special::beta_inc_pair(0.5 * d.p1, 0.5 * d.p2, a / den, d.p2 / den);
        }
        case Family::Poisson: {
            if (x < 0.0) return {0.0, 1.0};
            if (d.p1 == 0.0) return {1.0, 0.0};
            if (std::isinf(x)) return {1.0, 0.0};
            const double k = std::floor(x);
            return {special::gamma_q(k + 1.0, d.p1), special::gamma_p(k + 1.0, d.p1)};
        }
        case Family::Binomial: {
            const double n = d.p1, p = d.p2;
            if (x < 0.0) return {0.0, 1.0};
            const double k = std::floor(x);
            if (k >= n) return {1.0, 0.0};
            if (p == 0.0) return {1.0, 0.0};
            if (p == 1.0) return {0.0, 1.0};
            return special::beta_inc_pair(n - k, k + 1.0, 1.0 - p, p);
        }
    }
    return {0.0, 1.0};
}

}  // namespace

double cdf(const DistSpec& d, double x) {
    d.validate();
    return cdf_sf(d, x).first;
}

double sf(const DistSpec& d, double x) {
    d.validate();
    return cdf_sf(d, x).second;
}

double pdf(const DistSpec& d, double x) {
    d.validate();
    if (std::isnan(x)) throw DomainError("pdf: x is NaN");
    switch (d.family) {
        case Family::Normal: return special::normal_pdf((x - d.p1) / d.p2) / d.p2;
        case Family::StudentT: {
            const double v = d.p1;
            return std::exp(log_gamma(0.5 * (v + 1.0)) - log_gamma(0.5 * v) - 0.5 * std::log(v * std::numbers::pi) -
                            0.5 * (v + 1.0) * std::log1p(x * x / v));
        }
        case Family::NoncentralT:
            if (d.p2 == 0.0) return pdf(DistSpec::student_t(d.p1), x);
            return nct_pdf(x, d.p1, d.p2);
        case Family::ChiSquare:
            return pdf(DistSpec::gamma(0.5 * d.p1, 2.0), x);
        case Family::Gamma: {
            if (x < 0.0) return 0.0;
            const double k = d.p1, th = d.p2;
            if (x == 0.0) return k < 1.0 ? kInf : (k == 1.0 ? 1.0 / th : 0.0);
            return std::exp((k - 1.0) * std::log(x / th) - x / th - log_gamma(k)) / th;
        }
        case Family::Exponential:
            return x < 0.0 ? 0.0 : std::exp(-x / d.p1) / d.p1;
        case Family::Weibull: {
            if (x < 0.0) return 0.0;
            const double k = d.p1, lam = d.p2;
            if (x == 0.0) return k < 1.0 ? kInf : (k == 1.0 ? 1.0 / lam : 0.0);
            const double r = x / lam;
            return k / lam * std::pow(r, k - 1.0) * std::exp(-std::pow(r, k));
        }
        case Family::F: {
            if (x < 0.0) return 0.0;
            const double d1 = d.p1, d2 = d.p2;
            if (x == 0.0) return d1 < 2.0 ? kInf : (d1 == 2.0 ? 1.0 : 0.0);
            return std::exp(0.5 * d1 * std::log(d1 / d2) + (0.5 * d1 - 1.0) * std::log(x) -
                            0.5 * (d1 + d2) * std::log1p(d1 * x / d2) - special::log_beta(0.5 * d1, 0.5 * d2));
        }
        case Family::Poisson: {
            if (x < 0.0 || std::floor(x) != x) return 0.0;
            if (d.p1 == 0.0) return x == 0.0 ? 1.0 : 0.0;
            return std::exp(x * std::log(d.p1) - d.p1 - log_gamma(x + 1.0));
        }
        case Family::Binomial: {
            const double n = d.p1, p = d.p2;
            if (x < 0.0 || x > n || std::floor(x) != x) return 0.0;
            if (p == 0.0) return x == 0.0 ? 1.0 : 0.0;
            if (p == 1.0) return x == n ? 1.0 : 0.0;
            const double lchoose = log_gamma(n + 1.0) - log_gamma(x + 1.0) - log_gamma(n - x + 1.0);
            return std::exp(lchoose + x * std::log(p) + (n - x) * std::log1p(-p));
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// quantile

double quantile(const DistSpec& d, double p) {
    d.validate();
    check_probability(p);
    auto cs = [&d](double x) { return cdf_sf(d, x); };
    switch (d.family) {
        case Family::Normal: return d.p1 + d.p2 * normal_quantile(p);
        case Family::Exponential: return -d.p1 * std::log1p(-p);
        case Family::Weibull: return d.p2 * std::pow(-std::log1p(-p), 1.0 / d.p1);
        case Family::StudentT: {
            const double z = normal_quantile(p);
            const double guess = z * (1.0 + (z * z + 1.0) / (4.0 * d.p1));
            return invert_continuous(cs, p, guess, 0.25 + 0.1 * std::abs(guess), -kInf, kInf, 1e-300);
        }
        case Family::NoncentralT: {
            const double z = normal_quantile(p);
            const double guess = d.p2 + z * std::sqrt(1.0 + d.p2 * d.p2 / (2.0 * d.p1));
            return invert_continuous(cs, p, guess, 0.25 + 0.1 * std::abs(guess), -std::numeric_limits<double>::max(),
                                     std::numeric_limits<double>::max(), 1e-300);
        }
        case Family::ChiSquare: {
            const double g = 2.0 * gamma_guess(0.5 * d.p1, p);
            return invert_continuous(cs, p, g, 0.1 * g + 1e-300, 0.0, kInf, 1e-300);
        }
        case Family::Gamma: {
            const double g = d.p2 * gamma_guess(d.p1, p);
            return invert_continuous(cs, p, g, 0.1 * g + 1e-300, 0.0, kInf, 1e-300);
        }
        case Family::F: {
            const double z = normal_quantile(p);
            const double g = std::exp(z * std::sqrt(2.0 / d.p1 + 2.0 / d.p2));
            return invert_continuous(cs, p, g, 0.1 * g, 0.0, kInf, 1e-300);
        }
        case Family::Poisson:
        case Family::Binomial: {
            const double m = d.mean();
            const double var = d.family == Family::Poisson ? m : m * (1.0 - d.p2);
            double k = std::floor(m + normal_quantile(p) * std::sqrt(var));
            k = std::clamp(k, 0.0, discrete_upper(d));
            // step up until cdf >= p, then step down while the predecessor still qualifies
            auto meets = [&](double v) {
                const auto [c, s] = cdf_sf(d, v);
                return p <= 0.5 ? c >= p : s <= 1.0 - p;
            };
            while (!meets(k)) k += 1.0;
            while (k > 0.0 && meets(k - 1.0)) k -= 1.0;
            return k;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// sampling

double draw(const DistSpec& d, RngStream& rng) {
    switch (d.family) {
        case Family::Normal: return d.p1 + d.p2 * std_normal(rng);
        case Family::StudentT: {
            const double z = std_normal(rng);
            return z / std::sqrt(2.0 * std_gamma(0.5 * d.p1, rng) / d.p1);
        }
        case Family::NoncentralT: {
            const double z = std_normal(rng);
            return (z + d.p2) / std::sqrt(2.0 * std_gamma(0.5 * d.p1, rng) / d.p1);
        }
        case Family::ChiSquare: return 2.0 * std_gamma(0.5 * d.p1, rng);
        case Family::F: {
            const double a = 2.0 * std_gamma(0.5 * d.p1, rng) / d.p1;
            const double b = 2.0 * std_gamma(0.5 * d.p2, rng) / d.p2;
            return a / b;
        }
        case Family::Gamma: return d.p2 * std_gamma(d.p1, rng);
        case Family::Exponential: return -d.p1 * std::log(rng.uniform());
        case Family::Weibull: return d.p2 * std::pow(-std::log(rng.uniform()), 1.0 / d.p1);
        case Family::Poisson: {
            const double lam = d.p1;
            if (lam == 0.0) return 0.0;
            if (lam < 30.0) {
                const double u = rng.uniform();
                double k = 0.0, pk = std::exp(-lam), c = pk;
                while (u > c && k < 1000.0) {
                    k += 1.0;
                    pk *= lam / k;
                    c += pk;
                }
                return k;
            }
            return quantile(d, rng.uniform());
        }
        case Family::Binomial: {
            const double n = d.p1, p = d.p2;
            if (p == 0.0) return 0.0;
            if (p == 1.0) return n;
            const double p0 = std::exp(n * std::log1p(-p));
            if (n * std::min(p, 1.0 - p) < 30.0 && p0 > 1e-280) {
                const double u = rng.uniform();
                double k = 0.0, pk = p0, c = p0;
                const double odds = p / (1.0 - p);
                while (u > c && k < n) {
                    pk *= (n - k) / (k + 1.0) * odds;
                    k += 1.0;
                    c += pk;
                }
                return k;
            }
            return quantile(d, rng.uniform());
        }
    }
    return 0.0;
}

std::vector<double> sample(const DistSpec& d, RngStream& rng, std::size_t count) {
    d.validate();
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(draw(d, rng));
    return out;
}

// ---------------------------------------------------------------------------
// free-standing t helpers

double student_t_cdf(double x, double df) {
    require(df > 0.0, "student t requires df > 0");
    return student_t_cdf_sf(x, df).first;
}

double student_t_quantile(double p, double df) { return quantile(DistSpec::student_t(df), p); }

double noncentral_t_cdf(double x, double df, double nc) { return nct_cdf_sf(x, df, nc).first; }

double noncentral_t_sf(double x, double df, double nc) { return nct_cdf_sf(x, df, nc).second; }

double noncentral_t_quantile(double p, double df, double nc) {
    return quantile(DistSpec::noncentral_t(df, nc), p);
}

}  // namespace tolpred
