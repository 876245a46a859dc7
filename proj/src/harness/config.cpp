#include "kmt/harness/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace kmt::harness {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                return key == a;
            }) == allowed.end())
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
}

}  // namespace

std::vector<dist::LatticeGaussianMixture> ExperimentConfig::build_laws() const {
    if (catalog.empty()) throw std::invalid_argument("config: empty catalog");
    if (assignment.empty()) throw std::invalid_argument("config: empty assignment");
    std::vector<dist::LatticeGaussianMixture> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const std::string& name = assignment[i % assignment.size()];
        auto it = std::find_if(catalog.begin(), catalog.end(),
                               [&](const dist::CatalogEntry& e) { return e.name == name; });
        if (it == catalog.end())
            throw std::invalid_argument("config: assignment references unknown law '" +
                                        name + "'");
        out.push_back(lambda_n == 1.0 ? it->law : it->law.scaled(lambda_n));
    }
    return out;
}

std::vector<haar::HolderFunction> ExperimentConfig::build_battery() const {
    if (battery_file.empty()) return haar::make_battery(battery);
    std::ifstream in(battery_file);
    if (!in) throw std::runtime_error("config: cannot open " + battery_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    return haar::parse_battery(ss.str());
}

std::vector<double> ExperimentConfig::t_grid() const {
    std::vector<double> g(t_grid_points);
    for (int i = 0; i < t_grid_points; ++i)
        g[i] = (t_grid_points == 1)
                   ? 0.0
                   : -t_max + 2.0 * t_max * i / (t_grid_points - 1);
    return g;
}

std::vector<double> ExperimentConfig::x_grid() const {
    std::vector<double> g(x_grid_points);
    for (int i = 0; i < x_grid_points; ++i)
        g[i] = x_grid_max * (i + 1) / x_grid_points;
    return g;
}

int ExperimentConfig::resolved_workers() const {
    if (workers > 0) return workers;
    if (const char* env = std::getenv("KMTCOUP_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

ParsedConfig parse_config(const std::string& json_text) {
    json j = json::parse(json_text);
    reject_unknown(j, {"model", "blocking", "functions", "experiment", "output"}, "root");
    ParsedConfig out;
    ExperimentConfig& cfg = out.experiment;

    const json& model = j.at("model");
    reject_unknown(model, {"catalog", "catalog_file", "assignment", "lambda", "lambda_n"},
                   "model");
    if (model.contains("catalog_file"))
        cfg.catalog = dist::load_catalog_file(model.at("catalog_file").get<std::string>());
    else
        cfg.catalog = dist::parse_catalog(model.at("catalog").dump());
    cfg.assignment = model.at("assignment").get<std::vector<std::string>>();
    cfg.lambda = model.value("lambda", 0.5);
    cfg.lambda_n = model.value("lambda_n", 1.0);

    const json& blocking = j.at("blocking");
    reject_unknown(blocking, {"n", "n_min"}, "blocking");
    cfg.n = blocking.at("n").get<int>();
    cfg.n_min = blocking.at("n_min").get<int>();

    const json& fns = j.at("functions");
    reject_unknown(fns, {"count", "L", "seed", "mirrored", "battery_file"}, "functions");
    cfg.battery.count = fns.value("count", 20);
    cfg.battery.L = fns.value("L", 1.0);
    cfg.battery.seed = fns.value("seed", std::uint64_t{1});
    cfg.battery.mirrored = fns.value("mirrored", false);
    cfg.battery_file = fns.value("battery_file", "");

    const json& exp = j.at("experiment");
    reject_unknown(exp,
                   {"replications", "seed", "haar_level", "t_grid_points", "t_max",
                    "x_grid_points", "x_grid_max", "retain_levels", "workers", "checks",
                    "mgf_c2", "monitor_c1", "monitor_c2", "monitor_c3",
                    "bootstrap_resamples", "sweep_n"},
                   "experiment");
    cfg.replications = exp.at("replications").get<std::int64_t>();
    cfg.seed = exp.at("seed").get<std::uint64_t>();
    cfg.haar_level = exp.value("haar_level", 6);
    cfg.t_grid_points = exp.value("t_grid_points", 9);
    cfg.t_max = exp.value("t_max", 0.25);
    cfg.x_grid_points = exp.value("x_grid_points", 40);
    cfg.x_grid_max = exp.value("x_grid_max", 2.0);
    cfg.retain_levels = exp.value("retain_levels", false);
    cfg.workers = exp.value("workers", 0);
    cfg.mgf_c2 = exp.value("mgf_c2", 64.0);
    cfg.monitor_c1 = exp.value("monitor_c1", 32.0);
    cfg.monitor_c2 = exp.value("monitor_c2", 1.0);
    cfg.monitor_c3 = exp.value("monitor_c3", 1.0);
    cfg.bootstrap_resamples = exp.value("bootstrap_resamples", 1000);
    if (exp.contains("sweep_n")) cfg.sweep_n = exp.at("sweep_n").get<std::vector<int>>();
    if (exp.contains("checks")) {
        const json& checks = exp.at("checks");
        reject_unknown(checks,
                       {"identities", "marginals", "correlations", "theorem_mgf",
                        "tail_fit", "lemma_basic", "quantile_monitor", "sign_symmetry",
                        "baseline", "dominance", "lemma_a3"},
                       "experiment.checks");
        CheckSettings& c = cfg.checks;
        c.identities = checks.value("identities", c.identities);
        c.marginals = checks.value("marginals", c.marginals);
        c.correlations = checks.value("correlations", c.correlations);
        c.theorem_mgf = checks.value("theorem_mgf", c.theorem_mgf);
        c.tail_fit = checks.value("tail_fit", c.tail_fit);
        c.lemma_basic = checks.value("lemma_basic", c.lemma_basic);
        c.quantile_monitor = checks.value("quantile_monitor", c.quantile_monitor);
        c.sign_symmetry = checks.value("sign_symmetry", c.sign_symmetry);
        c.baseline = checks.value("baseline", c.baseline);
        c.dominance = checks.value("dominance", c.dominance);
        c.lemma_a3 = checks.value("lemma_a3", c.lemma_a3);
    }

    if (j.contains("output")) {
        const json& output = j.at("output");
        reject_unknown(output,
                       {"dir", "write_samples", "write_diagnostics", "write_coupling"},
                       "output");
        out.output.dir = output.value("dir", "out");
        out.output.write_samples = output.value("write_samples", false);
        out.output.write_diagnostics = output.value("write_diagnostics", false);
        out.output.write_coupling = output.value("write_coupling", false);
    }

    if (!(cfg.lambda_n > 0.0 && cfg.lambda_n <= 1.0))
        throw std::invalid_argument("config: lambda_n must lie in (0, 1]");
    if (cfg.replications < 1)
        throw std::invalid_argument("config: replications must be >= 1");
    if (cfg.n <= cfg.n_min)
        throw std::invalid_argument("config: need n > n_min");
    return out;
}

ParsedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::uint64_t config_hash(const std::string& json_text) {
    // canonical dump sorts object keys, so the hash ignores key order
    const std::string canon = json::parse(json_text).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

HypothesisReport check_hypotheses(const ExperimentConfig& config) {
    HypothesisReport rep;
    rep.lambda_n_ok = config.lambda_n > 0.0 && config.lambda_n <= 1.0;
    rep.replications_ok = config.replications >= 1;

    // only the laws the assignment actually uses enter the hypothesis band
    std::vector<std::string> used = config.assignment;
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());

    bool first = true;
    for (const std::string& name : used) {
        auto it = std::find_if(config.catalog.begin(), config.catalog.end(),
                               [&](const dist::CatalogEntry& e) { return e.name == name; });
        if (it == config.catalog.end())
            throw std::invalid_argument("config: assignment references unknown law '" +
                                        name + "'");
        const dist::CatalogEntry& entry = *it;
        HypothesisReport::PerLaw pl;
        pl.name = entry.name;
        pl.variance = entry.law.variance();
        const auto law = config.lambda_n == 1.0 ? entry.law
                                                : entry.law.scaled(config.lambda_n);
        pl.lambda_star = dist::sakhanenko_lambda(law).lambda_star;
        pl.ok = config.lambda <= pl.lambda_star;
        if (first || pl.variance < rep.c_min) rep.c_min = pl.variance;
        if (first || pl.variance > rep.c_max) rep.c_max = pl.variance;
        first = false;
        rep.laws.push_back(pl);
    }
    rep.n_min_ok = config.n > config.n_min &&
                   static_cast<double>(config.n_min) > 2.0 * rep.c_max / rep.c_min;
    return rep;
}

bool HypothesisReport::all_ok() const {
    if (!n_min_ok || !lambda_n_ok || !replications_ok) return false;
    for (const auto& pl : laws)
        if (!pl.ok) return false;
    return true;
}

}  // namespace kmt::harness
