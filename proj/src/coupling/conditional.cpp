#include "kmt/coupling/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kmt/math/normal.hpp"
#include "kmt/math/roots.hpp"

namespace kmt::coupling {

namespace {
constexpr double kUMin = 1e-300;
constexpr double kUMax = 1.0 - 1e-16;
constexpr double kLogSupportFloor = -690.0;

double clamp_u(double z) {
    return std::clamp(kmt::math::normal_cdf(z), kUMin, kUMax);
}
}  // namespace

PairConditional::PairConditional(
    std::shared_ptr<const dist::LatticeGaussianMixture> law1,
    std::shared_ptr<const dist::LatticeGaussianMixture> law2, double c1, double c2)
    : law1_(std::move(law1)), law2_(std::move(law2)), c1_(c1), c2_(c2) {
    if (!law1_ || !law2_) throw std::invalid_argument("PairConditional: null law");
    if (std::fabs(law1_->step() - law2_->step()) > 1e-12 * law1_->step())
        throw std::invalid_argument("PairConditional: laws must share a lattice step");
    if (c1_ == c2_) throw std::invalid_argument("PairConditional: degenerate form");

    const double s1 = law1_->gaussian_variance();
    const double s2 = law2_->gaussian_variance();
    if (s1 == 0.0 && s2 == 0.0) {
        mode_ = Mode::discrete_discrete;
        return;
    }
    if (s1 == 0.0) {
        mode_ = Mode::atomic_left;
        return;
    }
    if (s2 == 0.0) {
        mode_ = Mode::atomic_right;
        return;
    }
    mode_ = Mode::mixture;
    const double rho = s1 / (s1 + s2);
    kappa_ = c2_ + (c1_ - c2_) * rho;
    sd_cond_ = std::fabs(c1_ - c2_) * std::sqrt(s1 * s2 / (s1 + s2));
    sigma_sum_ = std::sqrt(s1 + s2);
    collapsed_ = (s1 == s2);

    const auto& a1 = law1_->atoms();
    const auto& a2 = law2_->atoms();
    pair_u_.reserve(a1.size() * a2.size());
    pair_logpq_.reserve(a1.size() * a2.size());
    if (collapsed_) {
        const std::int64_t dmin = a1.front().index - a2.back().index;
        const std::int64_t dmax = a1.back().index - a2.front().index;
        diag_base_.assign(static_cast<std::size_t>(dmax - dmin + 1), 0.0);
        pair_diag_.reserve(a1.size() * a2.size());
        const double gamma = c1_ - kappa_;  // equals kappa_ - c2_ here
        for (std::int64_t d = dmin; d <= dmax; ++d)
            diag_base_[static_cast<std::size_t>(d - dmin)] =
                gamma * (law1_->origin() - law2_->origin() +
                         static_cast<double>(d) * law1_->step());
        for (const auto& atom1 : a1)
            for (const auto& atom2 : a2) {
                pair_u_.push_back(law1_->position(atom1.index) +
                                  law2_->position(atom2.index));
                pair_logpq_.push_back(std::log(atom1.weight) + std::log(atom2.weight));
                pair_diag_.push_back(
                    static_cast<std::int32_t>(atom1.index - atom2.index - dmin));
            }
    } else {
        pair_base_.reserve(a1.size() * a2.size());
        for (const auto& atom1 : a1)
            for (const auto& atom2 : a2) {
                const double pa = law1_->position(atom1.index);
                const double pb = law2_->position(atom2.index);
                pair_u_.push_back(pa + pb);
                pair_logpq_.push_back(std::log(atom1.weight) + std::log(atom2.weight));
                pair_base_.push_back((c1_ - kappa_) * pa + (c2_ - kappa_) * pb);
            }
    }
}

PairConditional::Result PairConditional::pair_from_form(const Realized& sum,
                                                        double form_value) const {
    Result r;
    r.form_value = form_value;
    r.y1 = Realized::continuous((form_value - c2_ * sum.value) / (c1_ - c2_));
    r.y2 = Realized::continuous((c1_ * sum.value - form_value) / (c1_ - c2_));
    return r;
}

PairConditional::Result PairConditional::invert_discrete(const Realized& sum,
                                                         double u) const {
    if (!sum.exact)
        throw std::runtime_error(
            "PairConditional: discrete conditioning needs an exact lattice value");
    const auto& a1 = law1_->atoms();
    const auto& a2 = law2_->atoms();
    // Valid pairs are (i1, sum.index - i1); the form value is monotone in i1
    // with slope sign sgn(c1 - c2), so one cumulative scan inverts the CDF.
    double total = 0.0;
    for (const auto& atom1 : a1) {
        auto hit = law2_->atom_at(sum.index - atom1.index);
        if (hit) total += atom1.weight * a2[*hit].weight;
    }
    if (total < 1e-300)
        throw std::runtime_error(
            "PairConditional: realized sum is outside the support of the pair law");
    const double target = u * total;
    const bool ascending = c1_ > c2_;
    double acc = 0.0;
    const std::size_t n = a1.size();
    std::size_t last_hit = n;  // most recent valid pair, for the tail fallback
    for (std::size_t step = 0; step < n; ++step) {
        const std::size_t i = ascending ? step : n - 1 - step;
        auto hit = law2_->atom_at(sum.index - a1[i].index);
        if (!hit) continue;
        last_hit = i;
        acc += a1[i].weight * a2[*hit].weight;
        if (acc >= target) break;
    }
    if (last_hit == n) throw std::logic_error("PairConditional: no valid pair found");
    const std::int64_t i1 = a1[last_hit].index;
    const std::int64_t i2 = sum.index - i1;
    Result r;
    r.y1 = Realized::lattice(law1_->position(i1), i1);
    r.y2 = Realized::lattice(law2_->position(i2), i2);
    r.form_value = c1_ * r.y1.value + c2_ * r.y2.value;
    return r;
}

PairConditional::Result PairConditional::invert_atomic(const Realized& sum,
                                                       double u) const {
    const bool left = (mode_ == Mode::atomic_left);
    const auto& discrete = left ? *law1_ : *law2_;
    const auto& smooth = left ? *law2_ : *law1_;
    const double sd = std::sqrt(smooth.gaussian_variance());
    const auto& atoms = discrete.atoms();
    const auto& satoms = smooth.atoms();

    // log-weights: log p_a + log f_smooth(s - pos_a), f evaluated stably
    std::vector<double> logw(atoms.size());
    double max_logw = -1e308;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const double rest = sum.value - discrete.position(atoms[i].index);
        double best = -1e308;
        for (const auto& b : satoms) {
            const double d = (rest - smooth.position(b.index)) / sd;
            best = std::max(best, std::log(b.weight) - 0.5 * d * d);
        }
        double acc = 0.0;
        for (const auto& b : satoms) {
            const double d = (rest - smooth.position(b.index)) / sd;
            acc += std::exp(std::log(b.weight) - 0.5 * d * d - best);
        }
        logw[i] = std::log(atoms[i].weight) + best + std::log(acc);
        max_logw = std::max(max_logw, logw[i]);
    }
    if (max_logw < kLogSupportFloor)
        throw std::runtime_error(
            "PairConditional: realized sum carries no conditional mass");
    double total = 0.0;
    for (double& w : logw) {
        w = std::exp(w - max_logw);
        total += w;
    }
    // Form value per atom: c_disc*pos + c_other*(s - pos), monotone in pos.
    const double slope = left ? (c1_ - c2_) : (c2_ - c1_);
    const bool ascending = slope > 0.0;
    const double target = u * total;
    double acc = 0.0;
    std::size_t chosen = atoms.size() - 1;
    for (std::size_t step = 0; step < atoms.size(); ++step) {
        const std::size_t i = ascending ? step : atoms.size() - 1 - step;
        acc += logw[i];
        if (acc >= target) {
            chosen = i;
            break;
        }
        chosen = i;
    }
    const double pos = discrete.position(atoms[chosen].index);
    Result r;
    const Realized d_val = Realized::lattice(pos, atoms[chosen].index);
    const Realized s_val{sum.value - pos, sum.index - atoms[chosen].index, sum.exact};
    r.y1 = left ? d_val : s_val;
    r.y2 = left ? s_val : d_val;
    r.form_value = c1_ * r.y1.value + c2_ * r.y2.value;
    return r;
}

PairConditional::Result PairConditional::invert_mixture(const Realized& sum, double z,
                                                        double u, Scratch& s) const {
    const std::size_t npairs = pair_u_.size();
    const double inv_ss = 1.0 / sigma_sum_;
    double max_e = -1e308;
    s.weight.resize(npairs);
    for (std::size_t i = 0; i < npairs; ++i) {
        const double d = (sum.value - pair_u_[i]) * inv_ss;
        const double e = pair_logpq_[i] - 0.5 * d * d;
        s.weight[i] = e;
        max_e = std::max(max_e, e);
    }
    if (max_e < kLogSupportFloor)
        throw std::runtime_error(
            "PairConditional: realized sum carries no conditional mass");

    const double* means = nullptr;
    std::size_t ncomp = 0;
    if (collapsed_) {
        s.mean.assign(diag_base_.size(), 0.0);
        for (std::size_t i = 0; i < npairs; ++i)
            s.mean[static_cast<std::size_t>(pair_diag_[i])] +=
                std::exp(s.weight[i] - max_e);
        means = diag_base_.data();
        ncomp = diag_base_.size();
    } else {
        for (std::size_t i = 0; i < npairs; ++i)
            s.weight[i] = std::exp(s.weight[i] - max_e);
        means = pair_base_.data();
        ncomp = npairs;
    }
    const std::vector<double>& w = collapsed_ ? s.mean : s.weight;

    double total = 0.0, mean_acc = 0.0, lo_m = 1e308, hi_m = -1e308;
    for (std::size_t i = 0; i < ncomp; ++i) {
        if (w[i] <= 0.0) continue;
        total += w[i];
        mean_acc += w[i] * means[i];
        lo_m = std::min(lo_m, means[i]);
        hi_m = std::max(hi_m, means[i]);
    }
    const double shift = kappa_ * sum.value;
    if (lo_m >= hi_m)  // single live component: exact Gaussian inverse
        return pair_from_form(sum, lo_m + shift + sd_cond_ * z);

    const double mu = mean_acc / total;
    const double reach = 12.0 + std::fabs(z);
    const double lo = lo_m - reach * sd_cond_;
    const double hi = hi_m + reach * sd_cond_;
    const double inv_sd = 1.0 / sd_cond_;
    auto fd = [&](double t, double& f, double& df) {
        double F = 0.0, dens = 0.0;
        for (std::size_t i = 0; i < ncomp; ++i) {
            if (w[i] <= 0.0) continue;
            const double d = (t - means[i]) * inv_sd;
            F += w[i] * kmt::math::normal_cdf(d);
            dens += w[i] * kmt::math::normal_pdf(d);
        }
        f = F / total - u;
        df = dens * inv_sd / total;
    };
    const double x_tol = 1e-10 * std::max(1.0, sd_cond_);
    const double spread = 0.5 * (hi_m - lo_m);
    const double start = mu + std::sqrt(sd_cond_ * sd_cond_ + spread * spread) * z;
    const double root = kmt::math::newton_bracketed(fd, lo, hi, start, x_tol);
    return pair_from_form(sum, root + shift);
}

PairConditional::Result PairConditional::invert(const Realized& sum, double z,
                                                Scratch& scratch) const {
    switch (mode_) {
        case Mode::discrete_discrete:
            return invert_discrete(sum, clamp_u(z));
        case Mode::atomic_left:
        case Mode::atomic_right:
            return invert_atomic(sum, clamp_u(z));
        case Mode::mixture:
            return invert_mixture(sum, z, clamp_u(z), scratch);
    }
    throw std::logic_error("unreachable");
}

PairConditional::Result PairConditional::invert(const Realized& sum, double z) const {
    Scratch s;
    return invert(sum, z, s);
}

}  // namespace kmt::coupling
