#include "tolpred/special.hpp"

#include "tolpred/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace tolpred::special {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

// lgamma(a) - [(a - 0.5) log a - a + 0.5 log(2 pi)]
double stirling_error(double a) {
    if (a < 15.0) {
        return log_gamma(a) - ((a - 0.5) * std::log(a) - a + kLogSqrt2Pi);
    }
    const double r = 1.0 / a;
    const double r2 = r * r;
    return r * (1.0 / 12.0 -
                r2 * (1.0 / 360.0 -
                      r2 * (1.0 / 1260.0 -
                            r2 * (1.0 / 1680.0 - r2 * (1.0 / 1188.0 - r2 * 691.0 / 360360.0)))));
}

// log( x^a e^{-x} / Gamma(a) ), accurate when a and x are both large.
double log_gamma_prefactor(double a, double x) {
    if (a < 15.0) {
        return a * std::log(x) - x - log_gamma(a);
    }
    const double d = (x - a) / a;
    // a log(x/a) + a - x  ==  -a (d - log1p(d))
    const double core = -a * (d - std::log1p(d));
    return core + 0.5 * std::log(a) - kLogSqrt2Pi - stirling_error(a);
}

double gamma_p_series(double a, double x, double log_pref) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return sum * std::exp(log_pref);
        }
    }
    throw ConvergenceError("gamma_p series did not converge");
}

double gamma_q_fraction(double a, double x, double log_pref) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return std::exp(log_pref) * h;
        }
    }
    throw ConvergenceError("gamma_q continued fraction did not converge");
}

std::pair<double, double> gamma_pq(double a, double x) {
    if (!(a > 0.0) || std::isnan(x) || x < 0.0) {
        throw DomainError("incomplete gamma requires a > 0 and x >= 0");
    }
    if (x == 0.0) return {0.0, 1.0};
    if (std::isinf(x)) return {1.0, 0.0};
    const double log_pref = log_gamma_prefactor(a, x);
    if (x < a + 1.0) {
        const double p = gamma_p_series(a, x, log_pref);
        return {p, 1.0 - p};
    }
    const double q = gamma_q_fraction(a, x, log_pref);
    return {1.0 - q, q};
}

double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw ConvergenceError("incomplete beta continued fraction did not converge");
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw DomainError("log_gamma requires x > 0");
    }
    if (x < 0.5) {
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    static constexpr std::array<double, 9> coef = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    const double z = x - 1.0;
    double sum = coef[0];
    for (int i = 1; i < 9; ++i) sum += coef[i] / (z + i);
    const double t = z + 7.5;
    return kLogSqrt2Pi + (z + 0.5) * std::log(t) - t + std::log(sum);
}

double log_beta(double a, double b) {
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double digamma(double x) {
    if (!(x > 0.0)) throw DomainError("digamma requires x > 0");
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double r = 1.0 / x;
    const double r2 = r * r;
    result += std::log(x) - 0.5 * r -
              r2 * (1.0 / 12.0 -
                    r2 * (1.0 / 120.0 -
                          r2 * (1.0 / 252.0 -
                                r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0 - r2 * 691.0 / 32760.0)))));
    return result;
}

double trigamma(double x) {
    if (!(x > 0.0)) throw DomainError("trigamma requires x > 0");
    double result = 0.0;
    while (x < 10.0) {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    const double r = 1.0 / x;
    const double r2 = r * r;
    result += r + 0.5 * r2 +
              r * r2 *
                  (1.0 / 6.0 -
                   r2 * (1.0 / 30.0 -
                         r2 * (1.0 / 42.0 -
                               r2 * (1.0 / 30.0 - r2 * (5.0 / 66.0 - r2 * (691.0 / 2730.0 - r2 * 7.0 / 6.0))))));
    return result;
}

double gamma_p(double a, double x) { return gamma_pq(a, x).first; }

double gamma_q(double a, double x) { return gamma_pq(a, x).second; }

std::pair<double, double> beta_inc_pair(double a, double b, double x, double y) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta requires a, b > 0");
    if (std::isnan(x) || x < 0.0 || x > 1.0) throw DomainError("incomplete beta requires 0 <= x <= 1");
    if (x == 0.0) return {0.0, 1.0};
    if (y == 0.0) return {1.0, 0.0};
    double log_front;
    if (a + b < 30.0) {
        log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
    } else {
        // Stirling form around the mode x0 = a / (a + b); keeps the large
        // log terms from cancelling.
        const double s = a + b;
        const double x0 = a / s, y0 = b / s;
        auto log_ratio = [](double v, double v0) {
            const double r = (v - v0) / v0;
            return std::abs(r) < 0.5 ? std::log1p(r) : std::log(v) - std::log(v0);
        };
        const double ta = a * log_ratio(x, x0);
        const double tb = b * log_ratio(y, y0);
        log_front = ta + tb + 0.5 * std::log(a * b / s) - kLogSqrt2Pi -
                    (stirling_error(a) + stirling_error(b) - stirling_error(s));
    }
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double v = front * beta_fraction(a, b, x) / a;
        return {v, 1.0 - v};
    }
    const double w = front * beta_fraction(b, a, y) / b;
    return {1.0 - w, w};
}

double beta_inc(double a, double b, double x) {
    return beta_inc_pair(a, b, x, 1.0 - x).first;
}

double beta_inc_upper(double a, double b, double x) {
    return beta_inc_pair(a, b, x, 1.0 - x).second;
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

// Wichura (1988), AS 241 PPND16, followed by one Newton step on erfc.
double normal_quantile(double p) {
    if (std::isnan(p) || p < 0.0 || p > 1.0) throw DomainError("normal_quantile requires 0 <= p <= 1");
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();

    const double q = p - 0.5;
    double val;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        val = q *
              (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                    6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                  1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
              (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                    3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                  5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                4.2313330701600911252e+1) * r + 1.0);
    } else {
        double r = q < 0.0 ? p : 1.0 - p;
        r = std::sqrt(-std::log(r));
        if (r <= 5.0) {
            r -= 1.6;
            val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                        2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                      3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                    4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
                  (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                        1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                      6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                    2.05319162663775882187e+0) * r + 1.0);
        } else {
            r -= 5.0;
            val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                        1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                      2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                    5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
                  (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                        1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                      1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                    5.99832206555887937690e-1) * r + 1.0);
        }
        if (q < 0.0) val = -val;
    }

    // Polish in the tail that has the smaller probability to keep relative accuracy.
    const double dens = normal_pdf(val);
    if (dens > 0.0) {
        const double err = p < 0.5 ? normal_cdf(val) - p : (1.0 - p) - normal_sf(val);
        val -= err / dens;
    }
    return val;
}

}  // namespace tolpred::special
