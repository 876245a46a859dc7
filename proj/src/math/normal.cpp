#include "kmt/math/normal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kmt::math {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kSqrt1_2 = 0.7071067811865475244008444;

// Acklam's rational approximation to the normal quantile (relative error
// below 1.2e-9 everywhere); used only as a starting point.
double quantile_guess(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kSqrt1_2); }

double normal_sf(double x) { return 0.5 * std::erfc(x * kSqrt1_2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
    double x = quantile_guess(p);
    // Two Halley iterations; the residual F(x) - p is formed in whichever
    // tail is the smaller one so no accuracy is lost to cancellation.
    for (int it = 0; it < 2; ++it) {
        double err = (p < 0.5) ? normal_cdf(x) - p
                               : (1.0 - p) - normal_sf(x);
        double d = normal_pdf(x);
        if (d <= 0.0) break;
        double u = err / d;
        x -= u / (1.0 + 0.5 * u * x);
    }
    return x;
}

}  // namespace kmt::math
