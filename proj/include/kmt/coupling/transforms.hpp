#ifndef KMT_COUPLING_TRANSFORMS_HPP
#define KMT_COUPLING_TRANSFORMS_HPP

#include <span>
#include <vector>

#include "kmt/coupling/realized.hpp"
#include "kmt/dist/lattice_mixture.hpp"

namespace kmt::coupling {

/// Quantile transformation: the generalized inverse of the target CDF at
/// Phi(n_value / sqrt(n_variance)).  Pure Gaussian targets pass the z-score
/// through exactly, discrete targets return the selected atom.
Realized quantile_transform(const dist::LatticeGaussianMixture& target,
                            double n_value, double n_variance);

/// Conditional quantile transformation of the contrast
/// T = alpha2 Y1 - alpha1 Y2 given Y1 + Y2 = x0, evaluated at the Gaussian
/// draw v_value of V = alpha2 N1 - alpha1 N2.  The alphas must match
/// sqrt(B1/B2) and sqrt(B2/B1) for the law variances.
double conditional_quantile_transform(const dist::LatticeGaussianMixture& law1,
                                      const dist::LatticeGaussianMixture& law2,
                                      double alpha1, double alpha2,
                                      double x0_realized, double v_value);

/// Split a realized block sum into components with the prescribed laws,
/// peeling from the last component to the first.  eta_values are Gaussian
/// draws with variances matching the component variances; internally each
/// peel uses the part of eta orthogonal to the running eta partial sum, so
/// that matching Gaussian components are reproduced exactly.  The returned
/// components sum to block_sum_value.
std::vector<double> auxiliary_disaggregate(
    double block_sum_value,
    std::span<const dist::LatticeGaussianMixture> component_laws,
    std::span<const double> eta_values);

}  // namespace kmt::coupling

#endif
