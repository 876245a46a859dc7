#ifndef KMT_HARNESS_MONTE_CARLO_HPP
#define KMT_HARNESS_MONTE_CARLO_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kmt/coupling/construction.hpp"
#include "kmt/haar/holder.hpp"
#include "kmt/harness/config.hpp"
#include "kmt/math/rng.hpp"

namespace kmt::harness {

/// One logged violation of the surrogate quantile inequality.
struct ViolationRecord {
    std::int64_t rep = 0;
    int m = 0, k = -1, j = 0;  // k = -1 marks the top-of-level residual
    double residual = 0.0;
    double bound = 0.0;
    double y_left = 0.0, y_right = 0.0;
    double b_left = 0.0, b_right = 0.0;
};

struct DiagNodeId {
    int m = 0;
    int k = -1;  // -1: top-of-level residual; otherwise internal node level
    int j = 0;
};

/// Raw Monte Carlo accumulation: everything later verdicts are computed from.
struct McResult {
    std::int64_t replications = 0;
    std::int64_t aborted = 0;
    std::vector<std::string> fn_ids;
    std::vector<std::vector<double>> s_samples;  // [function][rep]
    std::vector<double> max_abs_s;               // [rep], max over the battery
    std::vector<char> ok;                        // [rep], 0 for aborted

    // exact-identity audit (worst absolute gaps over all replications)
    double worst_tree_gap = 0.0;
    double worst_disagg_gap = 0.0;
    double worst_telescope_gap = 0.0;

    // per-index marginal counts against cell probabilities
    std::vector<std::vector<std::int64_t>> marginal_counts;
    std::vector<std::vector<double>> marginal_probs;

    // pairwise second-moment sums over the constructed sequence
    bool have_correlations = false;
    std::vector<double> corr_sum;    // per index
    std::vector<double> corr_sum2;   // per index
    std::vector<double> corr_cross;  // packed upper triangle

    // per-node residual samples for the exponential-bound monitors
    std::vector<DiagNodeId> diag_nodes;
    std::vector<std::vector<double>> diag_samples;  // [node][rep]

    // surrogate quantile-inequality monitor
    std::int64_t proviso_count = 0;
    std::int64_t violation_count = 0;
    std::vector<ViolationRecord> violations;  // capped at 1000 records
};

/// Run replications of the construction and accumulate statistics.  The
/// result is bitwise independent of the worker count: replications are
/// processed in fixed blocks whose partial results merge in block order.
McResult run_mc(const ExperimentConfig& config,
                const coupling::ConstructionPlan& plan,
                const std::vector<haar::HolderFunction>& battery);

/// Control arm: the constructed sequence is sampled fresh, independent of
/// the Gaussians, with the same marginal laws.
McResult baseline_independent(const ExperimentConfig& config,
                              const coupling::ConstructionPlan& plan,
                              const std::vector<haar::HolderFunction>& battery);

// ---- verdicts ----

struct MarginalCheck {
    bool pass = true;
    double min_p = 1.0;
    int worst_index = 0;  // 1-based
    double alpha_per_index = 0.0;
};
MarginalCheck check_marginals(const ExperimentConfig& config, const McResult& mc);

struct CorrelationCheck {
    bool pass = true;
    double max_abs_sequence = 0.0;
    double max_abs_residual = 0.0;
    double threshold = 0.0;  // 4 / sqrt(R)
};
CorrelationCheck check_correlations(const ExperimentConfig& config, const McResult& mc);

struct MgfCheck {
    bool pass = true;
    double worst_margin = 0.0;  // min of bound - adjusted estimate
    std::string worst_unit;
    double worst_t = 0.0;
};
/// Theorem-shape bound: bootstrap-adjusted E exp(t S_n(f)/log^2 n) against
/// exp(c2 t^2) on |t| <= t_max, per battery function.
MgfCheck check_theorem_bound(const ExperimentConfig& config, const McResult& mc);
/// Same bound for the per-node residuals (requires diagnostics retention).
MgfCheck check_lemma_basic(const ExperimentConfig& config, const McResult& mc);

struct TailFit {
    bool no_mass = false;
    bool pass = false;
    double slope = 0.0, intercept = 0.0, r_squared = 0.0;
    int usable_points = 0;
};
/// Least-squares fit of log tail frequency of max_f |S_n(f)| over the
/// normalized x grid; requires at least 5 occupied grid points.
TailFit tail_decay_fit(const ExperimentConfig& config, const McResult& mc);

struct SignSymmetryCheck {
    bool pass = true;
    double min_p = 1.0;
};
/// KS comparison of S_n(f) against -S_n(-f) on independent replication
/// halves; requires a mirrored battery.
SignSymmetryCheck check_sign_symmetry(const ExperimentConfig& config, const McResult& mc);

struct DominanceCheck {
    bool pass = true;
    double worst_excess = 0.0;  // max of P_construction - P_baseline - 3 SE
};
DominanceCheck check_dominance(const ExperimentConfig& config, const McResult& construction,
                               const McResult& baseline);

struct QuantileMonitorCheck {
    bool pass = true;
    std::int64_t proviso_count = 0;
    std::int64_t violation_count = 0;
    double violation_rate = 0.0;
};
QuantileMonitorCheck check_quantile_monitor(const McResult& mc);

struct LemmaA3Check {
    bool pass = false;
    double c1 = 0.0;
    double estimate = 0.0;
    double standard_error = 0.0;
    double bound = 0.0;  // 1 + 2/c1
};
/// Direct simulation of the truncated normalized sum against its
/// squared-exponential moment bound.
LemmaA3Check check_lemma_a3(std::span<const dist::LatticeGaussianMixture> laws,
                            double lambda, std::int64_t replications,
                            std::uint64_t seed);

/// Median over replications of max_f |S_n(f)|; the sweep's growth statistic.
double median_max_abs(const McResult& mc);

}  // namespace kmt::harness

#endif
