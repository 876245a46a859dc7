#include "kmt/coupling/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "kmt/coupling/conditional.hpp"
#include "kmt/math/normal.hpp"

namespace kmt::coupling {

namespace {

double clamped_u(double z) {
    return std::clamp(kmt::math::normal_cdf(z), 1e-300, 1.0 - 1e-16);
}

Realized resolve_on_lattice(const dist::LatticeGaussianMixture& law, double value) {
    const std::int64_t idx =
        static_cast<std::int64_t>(std::llround((value - law.origin()) / law.step()));
    if (std::fabs(value - law.position(idx)) > 1e-9 * law.step())
        throw std::runtime_error(
            "conditional transform: realized value " + std::to_string(value) +
            " is not on the lattice of the sum law (outside support)");
    return Realized::lattice(value, idx);
}

}  // namespace

Realized quantile_transform(const dist::LatticeGaussianMixture& target, double n_value,
                            double n_variance) {
    if (!(n_variance > 0.0))
        throw std::invalid_argument("quantile_transform: degenerate Gaussian input");
    const double z = n_value / std::sqrt(n_variance);
    if (target.purely_discrete()) {
        auto [value, index] = target.quantile_with_index(clamped_u(z));
        return Realized::lattice(value, index);
    }
    if (target.atoms().size() == 1) {
        // pure Gaussian target: exact z pass-through, no CDF round trip
        const double pos = target.position(target.atoms().front().index);
        return Realized::continuous(pos + std::sqrt(target.gaussian_variance()) * z);
    }
    return Realized::continuous(target.quantile(clamped_u(z)));
}

double conditional_quantile_transform(const dist::LatticeGaussianMixture& law1,
                                      const dist::LatticeGaussianMixture& law2,
                                      double alpha1, double alpha2, double x0_realized,
                                      double v_value) {
    const double b1 = law1.variance();
    const double b2 = law2.variance();
    if (!(b1 > 0.0) || !(b2 > 0.0))
        throw std::invalid_argument("conditional_quantile_transform: degenerate law");
    if (std::fabs(alpha1 - std::sqrt(b1 / b2)) > 1e-9 * alpha1 ||
        std::fabs(alpha2 - std::sqrt(b2 / b1)) > 1e-9 * alpha2)
        throw std::invalid_argument(
            "conditional_quantile_transform: alphas do not match the law variances");

    const double steps[] = {law1.step(), law2.step()};
    const double g = dist::common_step(steps);
    auto l1 = std::make_shared<dist::LatticeGaussianMixture>(law1.rescaled_to_step(g));
    auto l2 = std::make_shared<dist::LatticeGaussianMixture>(law2.rescaled_to_step(g));
    PairConditional cond(l1, l2, alpha2, -alpha1);

    Realized sum = Realized::continuous(x0_realized);
    if (l1->purely_discrete() && l2->purely_discrete()) {
        dist::LatticeGaussianMixture parent = dist::convolve(*l1, *l2);
        sum = resolve_on_lattice(parent, x0_realized);
    }
    const double v_sd = std::sqrt(alpha2 * alpha2 * b1 + alpha1 * alpha1 * b2);
    return cond.invert(sum, v_value / v_sd).form_value;
}

std::vector<double> auxiliary_disaggregate(
    double block_sum_value,
    std::span<const dist::LatticeGaussianMixture> component_laws,
    std::span<const double> eta_values) {
    const std::size_t q = component_laws.size();
    if (q == 0) throw std::invalid_argument("auxiliary_disaggregate: no components");
    if (eta_values.size() != q)
        throw std::invalid_argument("auxiliary_disaggregate: eta count mismatch");
    if (q == 1) return {block_sum_value};

    std::vector<double> steps(q);
    for (std::size_t i = 0; i < q; ++i) {
        if (!(component_laws[i].variance() > 0.0))
            throw std::invalid_argument("auxiliary_disaggregate: degenerate component");
        steps[i] = component_laws[i].step();
    }
    const double g = dist::common_step(steps);

    std::vector<std::shared_ptr<const dist::LatticeGaussianMixture>> comps(q);
    std::vector<std::shared_ptr<const dist::LatticeGaussianMixture>> prefixes(q);
    for (std::size_t i = 0; i < q; ++i) {
        comps[i] = std::make_shared<dist::LatticeGaussianMixture>(
            component_laws[i].rescaled_to_step(g));
        prefixes[i] = (i == 0) ? comps[0]
                               : std::make_shared<dist::LatticeGaussianMixture>(
                                     dist::convolve(*prefixes[i - 1], *comps[i]));
    }

    Realized sum = prefixes[q - 1]->purely_discrete()
                       ? resolve_on_lattice(*prefixes[q - 1], block_sum_value)
                       : Realized::continuous(block_sum_value);

    // Running eta partial sums; each peel consumes the part of eta_k that is
    // orthogonal to the running sum, which is independent of everything the
    // construction has already used.
    std::vector<double> var_partial(q), eta_partial(q);
    var_partial[0] = component_laws[0].variance();
    eta_partial[0] = eta_values[0];
    for (std::size_t i = 1; i < q; ++i) {
        var_partial[i] = var_partial[i - 1] + component_laws[i].variance();
        eta_partial[i] = eta_partial[i - 1] + eta_values[i];
    }

    std::vector<double> out(q);
    PairConditional::Scratch scratch;
    for (std::size_t k = q - 1; k >= 1; --k) {
        const double vk = component_laws[k].variance();
        const double Vk = var_partial[k];
        const double zeta = eta_values[k] - (vk / Vk) * eta_partial[k];
        const double zeta_sd = std::sqrt(vk * (Vk - vk) / Vk);
        PairConditional cond(prefixes[k - 1], comps[k], 0.0, 1.0);
        auto res = cond.invert(sum, zeta / zeta_sd, scratch);
        out[k] = res.y2.value;
        sum = res.y1;
    }
    out[0] = sum.value;
    return out;
}

}  // namespace kmt::coupling
