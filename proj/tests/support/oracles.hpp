#pragma once

// Test-side reference computations. These deliberately avoid the library's
// own quadrature, root finders and special functions.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// Composite Gauss-Legendre (5-point) on [a, b] with m equal panels.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b, int m) {
    static constexpr double x[5] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                                    -0.9061798459386640};
    static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                    0.2369268850561891, 0.2369268850561891};
    const double h = (b - a) / m;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        const double c = a + (i + 0.5) * h;
        double s = 0.0;
        for (int j = 0; j < 5; ++j) s += w[j] * f(c + 0.5 * h * x[j]);
        total += 0.5 * h * s;
    }
    return total;
}

inline double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// P(T <= x) for T ~ noncentral t(df, nc): mixes Phi(x s - nc) over the
// density of s = sqrt(V / df). Integrates in u = log s so the s^(df-1)
// singularity at zero is harmless.
inline double noncentral_t_cdf(double x, double df, double nc) {
    const double log_c = std::log(2.0) + 0.5 * df * std::log(0.5 * df) - std::lgamma(0.5 * df);
    auto g = [&](double u) {
        const double s = std::exp(u);
        return std::exp(log_c + df * u - 0.5 * df * s * s) * phi_cdf(x * s - nc);
    };
    return gauss_legendre(g, -40.0 / df - 20.0, 4.0, 40000);
}

// Golden-section search for the maximum of a unimodal function.
inline double golden_max(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * (1.0 + std::abs(c))) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - r * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + r * (b - a); fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace oracle
