#pragma once

// Root finding and quadrature used by the distribution kernel and fitters.

#include <functional>
#include <utility>

namespace tolpred::numeric {

using Fn = std::function<double(double)>;

// Brent's method on [a, b]; f(a) and f(b) must have opposite signs (or one
// of them is zero). Stops when the bracket is narrower than
// 2 * (4 eps |x| + xtol).
double brent(const Fn& f, double a, double b, double xtol = 0.0, int max_iter = 300);

// f is assumed nondecreasing. Grows [lo, hi] geometrically from the guess
// (downward while f > 0, upward while f < 0) until f changes
// sign, never leaving [min_x, max_x]. Throws ConvergenceError when no sign
// change is found.
std::pair<double, double> expand_bracket(const Fn& f, double guess, double step, double min_x,
                                         double max_x, int max_iter = 200);

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
};

// Adaptive Gauss-Kronrod (7/15) on [a, b] with interval bisection driven by
// the largest local error estimate.
QuadResult integrate(const Fn& f, double a, double b, double abs_tol = 1e-13,
                     double rel_tol = 1e-12, int max_intervals = 2000);

}  // namespace tolpred::numeric
