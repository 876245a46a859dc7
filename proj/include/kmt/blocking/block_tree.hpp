#ifndef KMT_BLOCKING_BLOCK_TREE_HPP
#define KMT_BLOCKING_BLOCK_TREE_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace kmt::blocking {

/// Consecutive index range {first..last} within J_m (1-based, inclusive).
struct IndexRange {
    int first = 1;
    int last = 0;
    int size() const { return last - first + 1; }
};

/// Monotone piecewise-linear map with knots (x_i, y_i); used for the
/// variance-equalizing map and its inverse.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    PiecewiseLinear(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;
    PiecewiseLinear inverse() const;

private:
    std::vector<double> x_, y_;
};

/// Per-level blocking data: index sets, variance maps, dyadic blocks and
/// block variances.  Level m has blocks I^m_{k,j} for k = 0..m, j = 1..2^k.
struct Level {
    int m = 0;
    int count = 0;                       // n_m = #J_m
    std::vector<double> variances;       // var(X^m_i), i = 1..n_m (0-based storage)
    std::vector<double> design_points;   // t^m_i = i 2^{M-m} / n
    std::vector<double> b_values;        // b_m(t^m_i)
    PiecewiseLinear b;                   // variance CDF map
    PiecewiseLinear a;                   // its inverse
    // blocks[k][j-1] for k = 0..m; block_variances parallel
    std::vector<std::vector<IndexRange>> blocks;
    std::vector<std::vector<double>> block_variances;
};

struct BlockTree {
    int n = 0;
    int n_min = 0;
    int depth = 0;  // M
    std::vector<Level> levels;  // index m = 0..M

    const IndexRange& block(int m, int k, int j) const {
        return levels.at(m).blocks.at(k).at(j - 1);
    }
    double block_variance(int m, int k, int j) const {
        return levels.at(m).block_variances.at(k).at(j - 1);
    }
    /// Original sequence index of level element i (1-based): i * 2^{M-m}.
    int original_index(int m, int i) const { return i << (depth - m); }
};

/// Build the dyadic blocking from per-index variances (index i = 1..n stored
/// 0-based).  Requires n > n_min > 2 Cmax/Cmin (the block-size hypothesis)
/// and strictly positive variances; set enforce_hypothesis = false to study
/// trees that violate it.
BlockTree build_tree(std::span<const double> variances, int n_min,
                     bool enforce_hypothesis = true);

/// True iff every block at every (m, k) carries at least two indices.
bool check_prop_imkj(const BlockTree& tree);

/// Largest |B_{k+1,2j-1} - B_{k+1,2j}| over all sibling pairs at all levels.
double check_prop_b1(const BlockTree& tree);

/// Largest max(ratio, 1/ratio) of sibling block variances.
double check_prop_b2(const BlockTree& tree);

}  // namespace kmt::blocking

#endif
