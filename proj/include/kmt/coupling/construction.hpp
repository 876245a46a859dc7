#ifndef KMT_COUPLING_CONSTRUCTION_HPP
#define KMT_COUPLING_CONSTRUCTION_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "kmt/blocking/block_tree.hpp"
#include "kmt/coupling/conditional.hpp"
#include "kmt/coupling/realized.hpp"
#include "kmt/dist/lattice_mixture.hpp"

namespace kmt::coupling {

/// Everything about one construction that depends only on the model (the
/// laws, the blocking, the dyadic node laws, conditional tables and alpha
/// weights) and is shared read-only by all replications.
class ConstructionPlan {
public:
    ConstructionPlan(std::vector<dist::LatticeGaussianMixture> laws, int n_min);

    struct Split {
        double c1 = 0.0;    // coefficient of the left child in the contrast
        double c2 = 0.0;    // coefficient of the right child (negative)
        double v_sd = 0.0;  // sd of the Gaussian contrast
        std::unique_ptr<PairConditional> cond;
    };

    struct LevelPlan {
        int m = 0;
        int count = 0;  // n_m
        // heap order over (k, j): offset(k, j) = 2^k - 1 + (j - 1), k = 0..m
        std::vector<std::shared_ptr<const dist::LatticeGaussianMixture>> node_laws;
        std::vector<double> node_vars;
        std::vector<Split> splits;  // internal nodes, k = 0..m-1
        // per leaf block: conditionals pairing (prefix_{k-1}, component_k)
        std::vector<std::vector<std::unique_ptr<PairConditional>>> peels;
        std::vector<std::shared_ptr<const dist::LatticeGaussianMixture>> comp_laws;
        std::vector<double> comp_vars;  // per i in J_m (0-based)
    };

    int n() const { return n_; }
    int depth() const { return tree_.depth; }
    const blocking::BlockTree& tree() const { return tree_; }
    const std::vector<LevelPlan>& levels() const { return levels_; }
    const dist::LatticeGaussianMixture& law_of(int original_index) const {
        return *x_laws_[original_index - 1];
    }
    double variance_of(int original_index) const {
        return x_laws_[original_index - 1]->variance();
    }
    std::size_t max_pair_count() const { return max_pairs_; }

    static int heap_offset(int k, int j) { return (1 << k) - 1 + (j - 1); }

private:
    int n_ = 0;
    blocking::BlockTree tree_;
    std::vector<std::shared_ptr<const dist::LatticeGaussianMixture>> x_laws_;
    std::vector<LevelPlan> levels_;
    std::size_t max_pairs_ = 0;
};

/// Per-level realized state, retained on demand for diagnostics.
struct LevelState {
    int m = 0;
    std::vector<double> w_node;    // realized Gaussian sums W^m_{k,j}, heap order
    std::vector<Realized> y_node;  // constructed sums
    std::vector<double> t_tilde;   // internal nodes only (heap order, k < m)
    std::vector<double> v_value;
    std::vector<double> w_leaf;    // W^m_i, i in J_m
    std::vector<Realized> y_leaf;  // constructed components
};

struct CouplingOutput {
    std::vector<double> x_tilde;        // constructed sequence, index i at [i-1]
    std::vector<double> n_values;       // the Gaussian inputs
    std::vector<LevelState> levels;     // retained only on request
    std::uint64_t master_seed = 0;      // rng trace
    std::uint64_t replication = 0;
};

/// Reusable buffers for one worker.
struct Workspace {
    PairConditional::Scratch scratch;
    std::vector<Realized> prev_y;
    LevelState state;
};

/// One level of the construction: block sums of the Gaussian inputs, the
/// top quantile transformation, the conditional splits down the dyadic tree
/// and the disaggregation of every finest block.  w_leaf holds the realized
/// Gaussian inputs W^m_i over J_m.
LevelState dyadic_level(const ConstructionPlan& plan, int m,
                        std::span<const double> w_leaf,
                        PairConditional::Scratch& scratch);

/// Run the full dyadic construction: a deterministic function of the
/// Gaussian draws (gaussians[i-1] realizes N_i with variance var(X_i)).
CouplingOutput run_construction(const ConstructionPlan& plan,
                                std::span<const double> gaussians,
                                bool retain_levels = false,
                                Workspace* workspace = nullptr);

/// Per-level diagnostic record: the quantile-coupling residuals and the
/// sibling contrasts used by the exponential-bound monitors.
struct LevelDiagnostics {
    int m = 0;
    double s0 = 0.0;              // Y~(0,1) - W(0,1)
    std::vector<double> s_kj;     // T~ - V per internal node, heap order
    std::vector<double> t_star;   // Y~ left - Y~ right
    std::vector<double> v_star;   // W left - W right
};

LevelDiagnostics level_diagnostics(const LevelState& state);

}  // namespace kmt::coupling

#endif
