#ifndef KMT_MATH_ROOTS_HPP
#define KMT_MATH_ROOTS_HPP

#include <cmath>
#include <stdexcept>

namespace kmt::math {

/// Bisection on a bracketing interval [lo, hi] with f(lo) <= 0 <= f(hi) or
/// the reverse; stops when the interval is shorter than x_tol.
template <class F>
double bisect(F&& f, double lo, double hi, double x_tol, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::runtime_error("bisect: interval does not bracket a root");
    for (int i = 0; i < max_iter && hi - lo > x_tol; ++i) {
        double m = 0.5 * (lo + hi);
        double fmid = f(m);
        if (fmid == 0.0) return m;
        if ((fmid > 0.0) == (fhi > 0.0)) {
            hi = m;
            fhi = fmid;
        } else {
            lo = m;
            flo = fmid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Newton iteration safeguarded by a maintained bracket; fd must return the
/// pair (f(x), f'(x)) through out-parameters.  Assumes f increasing.
template <class FD>
double newton_bracketed(FD&& fd, double lo, double hi, double x0, double x_tol,
                        int max_iter = 100) {
    double x = std::fmin(std::fmax(x0, lo), hi);
    for (int i = 0; i < max_iter; ++i) {
        double fx, dfx;
        fd(x, fx, dfx);
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        double step = (dfx > 0.0) ? fx / dfx : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) <= x_tol) return xn;
        x = xn;
    }
    return x;
}

}  // namespace kmt::math

#endif
