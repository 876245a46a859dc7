#ifndef KMT_MATH_SPECIAL_HPP
#define KMT_MATH_SPECIAL_HPP

namespace kmt::math {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a), a > 0, x >= 0.
double gamma_q(double a, double x);

/// Chi-square survival function with k degrees of freedom.
double chi_square_sf(double stat, double dof);

/// Kolmogorov distribution tail Q(t) = P(sup|B| > t); used for KS p-values.
double kolmogorov_q(double t);

}  // namespace kmt::math

#endif
