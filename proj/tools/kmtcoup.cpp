// kmtcoup: batch driver for the dyadic coupling simulator.
//
// Subcommands: validate (hypothesis audit), run (Monte Carlo + checks),
// report (render stored results), sweep (n-grid growth study).
// Exit codes: 0 pass, 1 hypothesis/soft-assertion warning or failed check,
// 2 config error, 3 I/O error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kmt/harness/config.hpp"
#include "kmt/harness/monte_carlo.hpp"
#include "kmt/harness/summary.hpp"
#include "kmt/math/stats.hpp"
#include "kmt/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kmt;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitWarn = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct RunFlags {
    std::string config_path;
    std::string out_dir;
    int workers = -1;
    std::int64_t seed = -1;
    bool retain_levels = false;
};

harness::ParsedConfig load_with_overrides(const RunFlags& flags) {
    harness::ParsedConfig parsed = harness::load_config_file(flags.config_path);
    if (!flags.out_dir.empty()) parsed.output.dir = flags.out_dir;
    if (flags.workers >= 0) parsed.experiment.workers = flags.workers;
    if (flags.seed >= 0) parsed.experiment.seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.retain_levels) parsed.experiment.retain_levels = true;
    return parsed;
}

int cmd_validate(const RunFlags& flags) {
    harness::ParsedConfig parsed;
    try {
        parsed = load_with_overrides(flags);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    const harness::ExperimentConfig& cfg = parsed.experiment;
    try {
        auto report = harness::check_hypotheses(cfg);
        std::printf("n = %d, n_min = %d, lambda = %g, lambda_n = %g\n", cfg.n, cfg.n_min,
                    cfg.lambda, cfg.lambda_n);
        std::printf("variance band: [%.6g, %.6g], block-size hypothesis (n_min > 2*Cmax/Cmin): %s\n",
                    report.c_min, report.c_max, report.n_min_ok ? "ok" : "VIOLATED");
        for (const auto& law : report.laws)
            std::printf("law %-16s var %.6g lambda* %.6g  moment condition at lambda: %s\n",
                        law.name.c_str(), law.variance, law.lambda_star,
                        law.ok ? "ok" : "VIOLATED");
        // the coupled Gaussians satisfy the same condition only for small lambda
        for (const auto& law : report.laws) {
            auto g = dist::sakhanenko_lambda(
                dist::LatticeGaussianMixture::gaussian(law.variance * cfg.lambda_n *
                                                       cfg.lambda_n));
            std::printf("law %-16s matched-Gaussian lambda* %.6g\n", law.name.c_str(),
                        g.lambda_star);
        }
        if (!report.n_min_ok || !report.lambda_n_ok || !report.replications_ok) {
            std::cerr << "config error: blocking requires n > n_min > 2*Cmax/Cmin, "
                         "0 < lambda_n <= 1 and replications >= 1\n";
            return kExitConfig;
        }
        if (!report.all_ok()) {
            std::printf("verdict: hypothesis warning\n");
            return kExitWarn;
        }
        // building the plan exercises the blocking preconditions
        coupling::ConstructionPlan plan(cfg.build_laws(), cfg.n_min);
        std::printf("verdict: all hypotheses hold (depth M = %d)\n", plan.depth());
        return kExitPass;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}

json run_one(const harness::ExperimentConfig& cfg, std::uint64_t cfg_hash,
             const harness::OutputOptions& output, const fs::path& dir,
             std::vector<std::string>& outputs, bool& all_pass) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    const harness::HypothesisReport hypotheses = harness::check_hypotheses(cfg);
    coupling::ConstructionPlan plan(cfg.build_laws(), cfg.n_min);
    auto battery = cfg.build_battery();
    harness::McResult mc = harness::run_mc(cfg, plan, battery);
    std::unique_ptr<harness::McResult> baseline;
    if (cfg.checks.baseline || cfg.checks.dominance)
        baseline = std::make_unique<harness::McResult>(
            harness::baseline_independent(cfg, plan, battery));
    harness::CheckOutcomes outcomes = harness::run_checks(cfg, mc, baseline.get());
    const double elapsed =
        std::chrono::duration<double>(clock::now() - t0).count();

    std::string summary =
        harness::summary_json(cfg, cfg_hash, mc, baseline.get(), outcomes, elapsed);
    {
        json sj = json::parse(summary);
        sj["verdicts"]["hypotheses_hold"] = hypotheses.all_ok();
        summary = sj.dump(2);
    }
    write_file(dir / "summary.json", summary);
    outputs.push_back("summary.json");
    write_file(dir / "tail_curves.csv",
               harness::tail_curves_csv(cfg, mc, baseline.get()));
    outputs.push_back("tail_curves.csv");
    if (output.write_samples) {
        write_file(dir / "samples.csv", harness::samples_csv(mc));
        outputs.push_back("samples.csv");
    }
    if (output.write_diagnostics && !mc.diag_samples.empty()) {
        write_file(dir / "diagnostics.csv", harness::diagnostics_csv(mc));
        outputs.push_back("diagnostics.csv");
    }
    if (output.write_coupling) {
        std::ostringstream cs;
        cs.precision(17);
        cs << "rep,i,n_value,x_tilde\n";
        const std::int64_t cap = std::min<std::int64_t>(cfg.replications, 100);
        auto laws = cfg.build_laws();
        for (std::int64_t rep = 0; rep < cap; ++rep) {
            math::RandomStream rs(cfg.seed, math::Stream::construction, rep);
            std::vector<double> gaussians(cfg.n);
            for (int i = 0; i < cfg.n; ++i)
                gaussians[i] = std::sqrt(laws[i].variance()) * rs.gaussian();
            auto out = coupling::run_construction(plan, gaussians);
            for (int i = 0; i < cfg.n; ++i)
                cs << rep << "," << (i + 1) << "," << out.n_values[i] << ","
                   << out.x_tilde[i] << "\n";
        }
        write_file(dir / "coupling.csv", cs.str());
        outputs.push_back("coupling.csv");
    }

    all_pass = outcomes.all_pass() && hypotheses.all_ok();
    return json::parse(summary);
}

int cmd_run(const RunFlags& flags) {
    harness::ParsedConfig parsed;
    std::string config_text;
    try {
        config_text = read_file(flags.config_path);
        parsed = load_with_overrides(flags);
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    const std::uint64_t cfg_hash = harness::config_hash(config_text);
    const fs::path dir = parsed.output.dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "i/o error: cannot create " << dir << ": " << ec.message() << "\n";
        return kExitIo;
    }

    json manifest;
    manifest["config_path"] = flags.config_path;
    manifest["config_hash"] = cfg_hash;
    manifest["version"] = kVersion;
    manifest["seed"] = parsed.experiment.seed;
    manifest["started"] = now_iso8601();
    std::vector<std::string> outputs;
    bool all_pass = false;
    try {
        json summary = run_one(parsed.experiment, cfg_hash, parsed.output, dir, outputs,
                               all_pass);
        manifest["finished"] = now_iso8601();
        manifest["outputs"] = outputs;
        manifest["verdicts"] = summary.at("verdicts");
        write_file(dir / "manifest.json", manifest.dump(2));
        std::printf("%s: %s\n", all_pass ? "PASS" : "WARN",
                    summary.at("verdicts").dump().c_str());
        return all_pass ? kExitPass : kExitWarn;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        if (what.find("cannot write") != std::string::npos ||
            what.find("cannot open") != std::string::npos) {
            std::cerr << "i/o error: " << what << "\n";
            return kExitIo;
        }
        std::cerr << "run failed: " << what << "\n";
        return kExitWarn;
    }
}

int cmd_sweep(const RunFlags& flags) {
    harness::ParsedConfig parsed;
    std::string config_text;
    try {
        config_text = read_file(flags.config_path);
        parsed = load_with_overrides(flags);
        if (parsed.experiment.sweep_n.empty())
            throw std::invalid_argument("sweep: experiment.sweep_n is empty");
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    const std::uint64_t cfg_hash = harness::config_hash(config_text);
    const fs::path dir = parsed.output.dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "i/o error: cannot create " << dir << "\n";
        return kExitIo;
    }

    json manifest;
    manifest["config_path"] = flags.config_path;
    manifest["config_hash"] = cfg_hash;
    manifest["version"] = kVersion;
    manifest["seed"] = parsed.experiment.seed;
    manifest["started"] = now_iso8601();
    std::vector<std::string> outputs;

    bool sweep_pass = true;
    json points = json::array();
    try {
        for (int n : parsed.experiment.sweep_n) {
            harness::ExperimentConfig cfg = parsed.experiment;
            cfg.n = n;
            cfg.checks.baseline = true;
            const fs::path subdir = dir / ("n" + std::to_string(n));
            fs::create_directories(subdir);
            std::vector<std::string> sub_outputs;
            bool pass = false;
            json summary = run_one(cfg, cfg_hash, parsed.output, subdir, sub_outputs, pass);
            sweep_pass = sweep_pass && pass;
            for (const auto& f : sub_outputs)
                outputs.push_back("n" + std::to_string(n) + "/" + f);
            points.push_back(
                {{"n", n},
                 {"pass", pass},
                 {"median_max_abs", summary.at("battery_max").at("median")},
                 {"baseline_median_max_abs", summary.at("baseline_max").at("median")}});
        }
        // growth exponents from the log-log regression across the grid
        std::vector<double> lx, lc, lb;
        for (const auto& p : points) {
            lx.push_back(std::log(p.at("n").get<double>()));
            lc.push_back(std::log(p.at("median_max_abs").get<double>()));
            lb.push_back(std::log(p.at("baseline_median_max_abs").get<double>()));
        }
        json sweep;
        sweep["points"] = points;
        if (lx.size() >= 2) {
            auto cfit = math::fit_line(lx, lc);
            auto bfit = math::fit_line(lx, lb);
            sweep["construction_exponent"] = cfit.slope;
            sweep["baseline_exponent"] = bfit.slope;
        }
        sweep["pass"] = sweep_pass;
        write_file(dir / "sweep.json", sweep.dump(2));
        outputs.push_back("sweep.json");
        manifest["finished"] = now_iso8601();
        manifest["outputs"] = outputs;
        manifest["verdicts"] = {{"sweep_pass", sweep_pass}};
        write_file(dir / "manifest.json", manifest.dump(2));
        std::printf("%s: sweep over %zu sizes\n", sweep_pass ? "PASS" : "WARN",
                    points.size());
        return sweep_pass ? kExitPass : kExitWarn;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "sweep failed: " << e.what() << "\n";
        return kExitWarn;
    }
}

int cmd_report(const std::string& results_dir) {
    const fs::path dir = results_dir;
    std::vector<std::string> missing;
    if (!fs::exists(dir / "manifest.json")) missing.push_back("manifest.json");
    const bool has_summary = fs::exists(dir / "summary.json");
    const bool has_sweep = fs::exists(dir / "sweep.json");
    if (!has_summary && !has_sweep) missing.push_back("summary.json or sweep.json");
    if (!missing.empty()) {
        std::cerr << "missing files in " << dir << ":";
        for (const auto& f : missing) std::cerr << " " << f;
        std::cerr << "\n";
        return kExitConfig;
    }
    try {
        json manifest = json::parse(read_file((dir / "manifest.json").string()));
        std::printf("run of %s (version %s, seed %llu)\n",
                    manifest.value("config_path", "?").c_str(),
                    manifest.value("version", "?").c_str(),
                    static_cast<unsigned long long>(manifest.value("seed", 0ull)));
        std::printf("config hash %llx, started %s, finished %s\n",
                    static_cast<unsigned long long>(manifest.value("config_hash", 0ull)),
                    manifest.value("started", "?").c_str(),
                    manifest.value("finished", "?").c_str());

        auto print_summary = [&](const json& summary, const std::string& label) {
            if (summary.at("config").at("hash").get<std::uint64_t>() !=
                manifest.at("config_hash").get<std::uint64_t>())
                throw std::runtime_error("summary/manifest config hash mismatch");
            std::printf("-- %s --\n", label.c_str());
            const json& v = summary.at("verdicts");
            for (const auto& [key, val] : v.items()) {
                if (key == "all_pass") continue;
                if (val.is_object() && val.contains("pass"))
                    std::printf("  %-18s %s\n", key.c_str(),
                                val.at("pass").get<bool>() ? "pass" : "FAIL");
            }
            if (v.contains("tail_fit") && !v.at("tail_fit").value("no_mass", false))
                std::printf("  tail fit: slope %.4f, R^2 %.4f\n",
                            v.at("tail_fit").value("slope", 0.0),
                            v.at("tail_fit").value("r_squared", 0.0));
            std::printf("  overall: %s\n",
                        v.at("all_pass").get<bool>() ? "pass" : "FAIL");
        };

        if (has_summary) {
            json summary = json::parse(read_file((dir / "summary.json").string()));
            print_summary(summary, "summary");
        }
        if (has_sweep) {
            json sweep = json::parse(read_file((dir / "sweep.json").string()));
            std::printf("-- sweep --\n");
            std::printf("  %8s %18s %18s\n", "n", "median max|S|", "baseline median");
            for (const auto& p : sweep.at("points"))
                std::printf("  %8d %18.6g %18.6g\n", p.at("n").get<int>(),
                            p.at("median_max_abs").get<double>(),
                            p.at("baseline_median_max_abs").get<double>());
            if (sweep.contains("construction_exponent"))
                std::printf("  growth exponents: construction %.4f, baseline %.4f\n",
                            sweep.at("construction_exponent").get<double>(),
                            sweep.at("baseline_exponent").get<double>());
            // per-n summaries render too
            for (const auto& p : sweep.at("points")) {
                const fs::path sub =
                    dir / ("n" + std::to_string(p.at("n").get<int>())) / "summary.json";
                if (fs::exists(sub)) {
                    json summary = json::parse(read_file(sub.string()));
                    print_summary(summary, "n = " + std::to_string(p.at("n").get<int>()));
                }
            }
        }
        return kExitPass;
    } catch (const std::exception& e) {
        std::cerr << "report error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadic coupling simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunFlags flags;
    std::string results_dir;

    auto add_common = [&](CLI::App* cmd, bool need_config) {
        if (need_config)
            cmd->add_option("--config", flags.config_path, "config JSON")->required();
        cmd->add_option("--out", flags.out_dir, "output directory override");
        cmd->add_option("--workers", flags.workers, "worker threads (0 = hardware)");
        cmd->add_option("--seed", flags.seed, "master seed override");
        cmd->add_flag("--retain-levels", flags.retain_levels, "keep level archives");
    };

    CLI::App* validate = app.add_subcommand("validate", "audit the theorem hypotheses");
    add_common(validate, true);
    CLI::App* run = app.add_subcommand("run", "run the experiment and all enabled checks");
    add_common(run, true);
    CLI::App* sweep = app.add_subcommand("sweep", "run the n-grid growth study");
    add_common(sweep, true);
    CLI::App* report = app.add_subcommand("report", "render stored results");
    report->add_option("results_dir", results_dir, "directory written by run/sweep")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfig;
    }

    if (validate->parsed()) return cmd_validate(flags);
    if (run->parsed()) return cmd_run(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (report->parsed()) return cmd_report(results_dir);
    return kExitConfig;
}
