#ifndef KMT_HARNESS_SUMMARY_HPP
#define KMT_HARNESS_SUMMARY_HPP

#include <optional>
#include <string>

#include "kmt/harness/monte_carlo.hpp"

namespace kmt::harness {

/// Everything the run decided, for the summary document and the exit code.
struct CheckOutcomes {
    bool identities_checked = false;
    bool identities_pass = true;
    std::optional<MarginalCheck> marginals;
    std::optional<CorrelationCheck> correlations;
    std::optional<MgfCheck> theorem;
    std::optional<MgfCheck> lemma_basic;
    std::optional<TailFit> tail;
    std::optional<SignSymmetryCheck> sign_symmetry;
    std::optional<DominanceCheck> dominance;
    std::optional<QuantileMonitorCheck> monitor;
    std::optional<LemmaA3Check> lemma_a3;
    std::string failure_note;  // set when a check could not run

    bool all_pass() const;
};

/// Run every check the configuration enables.
CheckOutcomes run_checks(const ExperimentConfig& config, const McResult& construction,
                         const McResult* baseline);

/// Summary document (JSON text): config echo, verdicts, margins, fitted
/// parameters, per-function MGF and tail tables and the seed.  Timing lives
/// in its own subobject so it can be stripped for comparisons.
std::string summary_json(const ExperimentConfig& config, std::uint64_t config_hash,
                         const McResult& construction, const McResult* baseline,
                         const CheckOutcomes& outcomes, double elapsed_seconds);

/// Per-replication records: rep, function id, S_n(f).
std::string samples_csv(const McResult& mc);

/// Residual diagnostics: rep, m, k, j, value (k = -1 for the level top).
std::string diagnostics_csv(const McResult& mc);

/// Tail curves on the normalized x grid, gnuplot-ready: one column per
/// battery function plus the battery maximum (and the baseline maximum when
/// present).
std::string tail_curves_csv(const ExperimentConfig& config, const McResult& construction,
                            const McResult* baseline);

}  // namespace kmt::harness

#endif
