#ifndef KMT_MATH_QUADRATURE_HPP
#define KMT_MATH_QUADRATURE_HPP

#include <array>
#include <cmath>

namespace kmt::math {

/// 16-node Gauss-Legendre rule on [a, b].
template <class F>
double gauss_legendre_16(F&& f, double a, double b) {
    static constexpr std::array<double, 8> x = {
        0.0950125098376374401853193, 0.2816035507792589132304605,
        0.4580167776572273863424194, 0.6178762444026437484466718,
        0.7554044083550030338951012, 0.8656312023878317438804679,
        0.9445750230732325760779884, 0.9894009349916499325961542};
    static constexpr std::array<double, 8> w = {
        0.1894506104550684962853967, 0.1826034150449235888667637,
        0.1691565193950025381893121, 0.1495959888165767320815017,
        0.1246289712555338720524763, 0.0951585116824927848099251,
        0.0622535239386478928628438, 0.0271524594117540948517806};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 8; ++i)
        acc += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
    return acc * half;
}

namespace detail {
inline double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adapt(F&& f, double a, double fa, double b, double fb, double m, double fm,
             double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson on [a, b] with absolute tolerance abs_tol.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 40) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = detail::simpson(a, fa, b, fb, fm);
    return detail::adapt(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

}  // namespace kmt::math

#endif
