#ifndef KMT_MATH_NORMAL_HPP
#define KMT_MATH_NORMAL_HPP

namespace kmt::math {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal distribution function, computed via erfc so that both
/// tails keep full relative accuracy.
double normal_cdf(double x);

/// Upper tail P(Z > x).
double normal_sf(double x);

/// Inverse of normal_cdf on (0, 1).  Rational initial guess refined by two
/// Halley steps; accurate to a few ulps over the full double range.
double normal_quantile(double p);

}  // namespace kmt::math

#endif
