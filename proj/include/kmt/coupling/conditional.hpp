#ifndef KMT_COUPLING_CONDITIONAL_HPP
#define KMT_COUPLING_CONDITIONAL_HPP

#include <memory>
#include <vector>

#include "kmt/coupling/realized.hpp"
#include "kmt/dist/lattice_mixture.hpp"

namespace kmt::coupling {

/// Conditional law machinery for an independent pair (Y1, Y2) of
/// lattice-Gaussian mixtures on a shared lattice step, given Y1 + Y2 = s.
/// Inverts the conditional CDF of the linear form c1*Y1 + c2*Y2 (c1 != c2)
/// at u = Phi(z) and recovers the pair itself.
///
/// Four computational paths, chosen from the Gaussian components:
///  - both laws purely discrete: exact integer pair enumeration;
///  - exactly one law discrete: the conditional form is atomic over that
///    law's atoms with Bayes weights against the other law's density;
///  - both laws smeared: a Gaussian mixture over atom pairs, inverted by
///    safeguarded Newton (with a diagonal collapse of the pair table when
///    the two smear variances coincide).
class PairConditional {
public:
    PairConditional(std::shared_ptr<const dist::LatticeGaussianMixture> law1,
                    std::shared_ptr<const dist::LatticeGaussianMixture> law2,
                    double c1, double c2);

    struct Result {
        Realized y1;
        Realized y2;
        double form_value = 0.0;
    };

    /// Reusable per-thread buffers for the hot path.
    struct Scratch {
        std::vector<double> weight;
        std::vector<double> mean;
    };

    Result invert(const Realized& sum, double z, Scratch& scratch) const;
    Result invert(const Realized& sum, double z) const;

    std::size_t pair_count() const { return pair_u_.size(); }

private:
    enum class Mode { discrete_discrete, atomic_left, atomic_right, mixture };

    Result invert_discrete(const Realized& sum, double u) const;
    Result invert_atomic(const Realized& sum, double u) const;
    Result invert_mixture(const Realized& sum, double z, double u, Scratch& s) const;
    Result pair_from_form(const Realized& sum, double form_value) const;

    std::shared_ptr<const dist::LatticeGaussianMixture> law1_, law2_;
    double c1_, c2_;
    Mode mode_;

    // mixture-mode tables over atom pairs (a-major order)
    double kappa_ = 0.0;    // coefficient of s in the conditional mean
    double sd_cond_ = 0.0;  // common component sd of the conditional form
    double sigma_sum_ = 0.0;  // sqrt(sigma1^2 + sigma2^2)
    std::vector<double> pair_u_;      // pos_a + pos_b
    std::vector<double> pair_logpq_;  // log(p_a q_b)
    std::vector<double> pair_base_;   // conditional mean minus kappa*s
    bool collapsed_ = false;          // equal smears: group pairs by a - b
    std::vector<double> diag_base_;   // per-diagonal conditional mean offset
    std::vector<std::int32_t> pair_diag_;  // diagonal bin of each pair
};

}  // namespace kmt::coupling

#endif
