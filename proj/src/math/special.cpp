#include "kmt/math/special.hpp"

#include <cmath>
#include <stdexcept>

namespace kmt::math {

namespace {

// Series expansion of P(a,x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0)
        throw std::invalid_argument("gamma_q: requires a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_sf(double stat, double dof) {
    if (stat <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * stat);
}

double kolmogorov_q(double t) {
    if (t <= 0.0) return 1.0;
    if (t < 1.18) {
        // Jacobi theta form, fast for small t.
        double y = std::exp(-M_PI * M_PI / (8.0 * t * t));
        double p = std::sqrt(2.0 * M_PI) / t * (y + std::pow(y, 9) + std::pow(y, 25));
        return 1.0 - p;
    }
    double y = std::exp(-2.0 * t * t);
    return 2.0 * (y - std::pow(y, 4) + std::pow(y, 9) - std::pow(y, 16));
}

}  // namespace kmt::math
