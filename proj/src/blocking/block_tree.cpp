#include "kmt/blocking/block_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace kmt::blocking {

PiecewiseLinear::PiecewiseLinear(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2)
        throw std::invalid_argument("PiecewiseLinear: need matching knot arrays");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1]))
            throw std::invalid_argument("PiecewiseLinear: knots must increase");
}

double PiecewiseLinear::operator()(double t) const {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double w = (t - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return y_[i - 1] + w * (y_[i] - y_[i - 1]);
}

PiecewiseLinear PiecewiseLinear::inverse() const {
    return PiecewiseLinear(y_, x_);
}

BlockTree build_tree(std::span<const double> variances, int n_min,
                     bool enforce_hypothesis) {
    const int n = static_cast<int>(variances.size());
    if (n_min < 1 || n <= n_min)
        throw std::invalid_argument("build_tree: need n > n_min >= 1 (block-size hypothesis)");
    double vmin = variances[0], vmax = variances[0];
    for (double v : variances) {
        if (!(v > 0.0)) throw std::invalid_argument("build_tree: zero or negative variance");
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (enforce_hypothesis && n_min <= 2.0 * vmax / vmin)
        throw std::invalid_argument(
            "build_tree: block-size hypothesis requires n_min > 2*Cmax/Cmin = " +
            std::to_string(2.0 * vmax / vmin));

    BlockTree tree;
    tree.n = n;
    tree.n_min = n_min;
    int depth = 0;
    while (n >= n_min * (2 << depth)) ++depth;  // M = floor(log2(n / n_min))
    tree.depth = depth;

    tree.levels.resize(depth + 1);
    for (int m = 0; m <= depth; ++m) {
        Level& lev = tree.levels[m];
        lev.m = m;
        const int stride = 1 << (depth - m);
        lev.count = n / stride;
        lev.variances.resize(lev.count);
        lev.design_points.resize(lev.count);
        for (int i = 1; i <= lev.count; ++i) {
            lev.variances[i - 1] = variances[static_cast<std::size_t>(i) * stride - 1];
            lev.design_points[i - 1] = static_cast<double>(i) * stride / n;
        }
        // Variance CDF: beta_m is the step function equal to var(X^m_i) on
        // (t_{i-1}, t_i] and to the last variance on the stub up to 1.
        const double w = static_cast<double>(stride) / n;
        std::vector<double> xs, ys;
        xs.reserve(lev.count + 2);
        ys.reserve(lev.count + 2);
        xs.push_back(0.0);
        ys.push_back(0.0);
        double acc = 0.0;
        for (int i = 1; i <= lev.count; ++i) {
            acc += lev.variances[i - 1] * w;
            xs.push_back(lev.design_points[i - 1]);
            ys.push_back(acc);
        }
        if (xs.back() < 1.0) {
            acc += lev.variances[lev.count - 1] * (1.0 - xs.back());
            xs.push_back(1.0);
            ys.push_back(acc);
        }
        const double total = ys.back();
        for (double& y : ys) y /= total;
        ys.back() = 1.0;
        lev.b = PiecewiseLinear(xs, ys);
        lev.a = lev.b.inverse();
        lev.b_values.resize(lev.count);
        for (int i = 1; i <= lev.count; ++i) lev.b_values[i - 1] = ys[i];

        // Blocks: I^m_{k,j} = {i : b(t^m_i) in (s_{k,j-1}, s_{k,j}]}, a
        // consecutive run since b is increasing in i.
        lev.blocks.resize(m + 1);
        lev.block_variances.resize(m + 1);
        for (int k = 0; k <= m; ++k) {
            const int cells = 1 << k;
            lev.blocks[k].assign(cells, IndexRange{});
            lev.block_variances[k].assign(cells, 0.0);
            std::vector<int> cell_of(lev.count);
            for (int i = 1; i <= lev.count; ++i) {
                int j = static_cast<int>(std::ceil(lev.b_values[i - 1] * cells));
                j = std::clamp(j, 1, cells);
                cell_of[i - 1] = j;
            }
            int i = 1;
            for (int j = 1; j <= cells; ++j) {
                IndexRange r;
                r.first = i;
                while (i <= lev.count && cell_of[i - 1] == j) ++i;
                r.last = i - 1;
                lev.blocks[k][j - 1] = r;
                double bv = 0.0;
                for (int l = r.first; l <= r.last; ++l) bv += lev.variances[l - 1];
                lev.block_variances[k][j - 1] = bv;
            }
            if (i != lev.count + 1)
                throw std::logic_error("build_tree: block assignment not exhaustive");
            if (enforce_hypothesis)
                for (int j = 1; j <= cells; ++j)
                    if (lev.blocks[k][j - 1].size() < 2)
                        throw std::logic_error(
                            "build_tree: block with fewer than two indices at level " +
                            std::to_string(m));
        }
    }
    return tree;
}

bool check_prop_imkj(const BlockTree& tree) {
    for (const Level& lev : tree.levels)
        for (const auto& row : lev.blocks)
            for (const IndexRange& r : row)
                if (r.size() < 2) return false;
    return true;
}

double check_prop_b1(const BlockTree& tree) {
    double worst = 0.0;
    for (const Level& lev : tree.levels)
        for (int k = 0; k + 1 <= lev.m; ++k)
            for (int j = 1; j <= (1 << k); ++j) {
                const double left = lev.block_variances[k + 1][2 * j - 2];
                const double right = lev.block_variances[k + 1][2 * j - 1];
                worst = std::max(worst, std::fabs(left - right));
            }
    return worst;
}

double check_prop_b2(const BlockTree& tree) {
    double worst = 1.0;
    for (const Level& lev : tree.levels)
        for (int k = 0; k + 1 <= lev.m; ++k)
            for (int j = 1; j <= (1 << k); ++j) {
                const double left = lev.block_variances[k + 1][2 * j - 2];
                const double right = lev.block_variances[k + 1][2 * j - 1];
                if (left <= 0.0 || right <= 0.0) return std::numeric_limits<double>::infinity();
                const double ratio = left / right;
                worst = std::max(worst, std::max(ratio, 1.0 / ratio));
            }
    return worst;
}

}  // namespace kmt::blocking
