#ifndef KMT_HARNESS_CONFIG_HPP
#define KMT_HARNESS_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kmt/dist/catalog.hpp"
#include "kmt/dist/sakhanenko.hpp"
#include "kmt/haar/holder.hpp"

namespace kmt::harness {

struct CheckSettings {
    bool identities = true;
    bool marginals = true;
    bool correlations = true;
    bool theorem_mgf = false;
    bool tail_fit = false;
    bool lemma_basic = false;
    bool quantile_monitor = false;
    bool sign_symmetry = false;
    bool baseline = false;
    bool dominance = false;
    bool lemma_a3 = false;
};

struct OutputOptions {
    std::string dir = "out";
    bool write_samples = false;
    bool write_diagnostics = false;
    bool write_coupling = false;
};

struct ExperimentConfig {
    // model
    std::vector<dist::CatalogEntry> catalog;
    std::vector<std::string> assignment;  // cycled over indices 1..n
    double lambda = 0.5;                  // moment-condition constant
    double lambda_n = 1.0;                // variance scale, 0 < lambda_n <= 1

    // blocking
    int n = 32;
    int n_min = 4;

    // test functions
    haar::BatteryOptions battery;
    std::string battery_file;  // explicit test-function set; overrides battery
    int haar_level = 6;

    // experiment
    std::int64_t replications = 1000;
    std::uint64_t seed = 1;
    int t_grid_points = 9;
    double t_max = 0.25;  // surrogate c1 of the MGF bound
    int x_grid_points = 40;
    double x_grid_max = 2.0;
    bool retain_levels = false;
    int workers = 0;  // 0 = all hardware threads
    CheckSettings checks;
    double mgf_c2 = 64.0;  // surrogate quadratic constant of the MGF bound
    double monitor_c1 = 32.0, monitor_c2 = 1.0, monitor_c3 = 1.0;
    int bootstrap_resamples = 1000;
    std::vector<int> sweep_n;

    /// Per-index laws, lambda_n-scaled.
    std::vector<dist::LatticeGaussianMixture> build_laws() const;
    /// Test-function battery: the explicit file when given, the generator
    /// options otherwise.
    std::vector<haar::HolderFunction> build_battery() const;
    std::vector<double> t_grid() const;
    std::vector<double> x_grid() const;
    int resolved_workers() const;  // flag, then KMTCOUP_WORKERS, then hardware
};

struct ParsedConfig {
    ExperimentConfig experiment;
    OutputOptions output;
};

/// Strict parse of the config document (sections model / blocking /
/// functions / experiment / output; unknown keys are rejected).
ParsedConfig parse_config(const std::string& json_text);
ParsedConfig load_config_file(const std::string& path);

/// Stable hash of the configuration (invariant under key reordering).
std::uint64_t config_hash(const std::string& json_text);

/// Hypothesis audit for the validate command.
struct HypothesisReport {
    struct PerLaw {
        std::string name;
        double variance = 0.0;
        double lambda_star = 0.0;
        bool ok = false;  // lambda <= lambda_star for the scaled law
    };
    std::vector<PerLaw> laws;
    double c_min = 0.0, c_max = 0.0;  // unscaled variance band
    bool n_min_ok = false;
    bool lambda_n_ok = false;
    bool replications_ok = false;
    bool all_ok() const;
};

HypothesisReport check_hypotheses(const ExperimentConfig& config);

}  // namespace kmt::harness

#endif
