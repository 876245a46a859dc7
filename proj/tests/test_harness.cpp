#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kmt/harness/config.hpp"
#include "kmt/harness/monte_carlo.hpp"
#include "kmt/harness/summary.hpp"

using namespace kmt::harness;
using kmt::dist::LatticeGaussianMixture;

namespace {

ExperimentConfig rademacher_config(int n, int n_min, std::int64_t reps) {
    ExperimentConfig cfg;
    cfg.catalog.push_back({"rademacher", LatticeGaussianMixture::rademacher()});
    cfg.assignment = {"rademacher"};
    cfg.lambda = 0.5;
    cfg.n = n;
    cfg.n_min = n_min;
    cfg.replications = reps;
    cfg.seed = 20240801;
    cfg.battery.count = 6;
    cfg.battery.seed = 11;
    cfg.workers = 1;
    return cfg;
}

ExperimentConfig gaussian_config(int n, int n_min, std::int64_t reps) {
    ExperimentConfig cfg = rademacher_config(n, n_min, reps);
    cfg.catalog.clear();
    cfg.catalog.push_back({"normal", LatticeGaussianMixture::gaussian(1.0)});
    cfg.assignment = {"normal"};
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("gaussian-only runs couple to zero") {
    auto cfg = gaussian_config(16, 4, 500);
    cfg.checks.tail_fit = true;
    cfg.checks.marginals = false;  // smooth laws need no GOF here
    auto plan = kmt::coupling::ConstructionPlan(cfg.build_laws(), cfg.n_min);
    auto battery = kmt::haar::make_battery(cfg.battery);
    auto mc = run_mc(cfg, plan, battery);
    CHECK(mc.aborted == 0);
    for (const auto& fs : mc.s_samples)
        for (std::size_t r = 0; r < fs.size(); ++r) CHECK(std::fabs(fs[r]) <= 1e-8);
    auto tail = tail_decay_fit(cfg, mc);
    CHECK(tail.no_mass);
    CHECK(tail.pass);
}

TEST_CASE("substream determinism and worker invariance") {
    auto cfg = rademacher_config(16, 4, 600);
    auto plan = kmt::coupling::ConstructionPlan(cfg.build_laws(), cfg.n_min);
    auto battery = kmt::haar::make_battery(cfg.battery);
    auto a = run_mc(cfg, plan, battery);

    auto cfg2 = cfg;
    cfg2.replications = 1200;  // doubling R reproduces the prefix exactly
    auto b = run_mc(cfg2, plan, battery);
    for (std::size_t f = 0; f < a.s_samples.size(); ++f)
        for (int r = 0; r < 600; ++r)
            CHECK(a.s_samples[f][r] == b.s_samples[f][r]);

    auto cfg3 = cfg;
    cfg3.workers = 3;  // same partition of replications into fixed blocks
    auto c = run_mc(cfg3, plan, battery);
    for (std::size_t f = 0; f < a.s_samples.size(); ++f)
        for (int r = 0; r < 600; ++r)
            CHECK(a.s_samples[f][r] == c.s_samples[f][r]);
    CHECK(a.worst_telescope_gap == c.worst_telescope_gap);
}

TEST_CASE("statistical gates on a small Rademacher run") {
    auto cfg = rademacher_config(16, 4, 10000);
    cfg.checks.quantile_monitor = true;
    cfg.checks.theorem_mgf = true;
    cfg.bootstrap_resamples = 200;
    auto plan = kmt::coupling::ConstructionPlan(cfg.build_laws(), cfg.n_min);
    auto battery = kmt::haar::make_battery(cfg.battery);
    auto mc = run_mc(cfg, plan, battery);

    CHECK(mc.worst_tree_gap <= 1e-10);
    CHECK(mc.worst_disagg_gap <= 1e-10);
    CHECK(mc.worst_telescope_gap <= 1e-9);

    auto marg = check_marginals(cfg, mc);
    CHECK(marg.pass);
    auto corr = check_correlations(cfg, mc);
    CHECK(corr.pass);
    auto monitor = check_quantile_monitor(mc);
    CHECK(monitor.pass);
    CHECK(monitor.proviso_count > 0);
    auto mgf = check_theorem_bound(cfg, mc);
    CHECK(mgf.pass);
    CHECK(mgf.worst_margin >= 0.0);

    // summary document renders and echoes the verdicts
    CheckOutcomes outcomes = run_checks(cfg, mc, nullptr);
    CHECK(outcomes.all_pass());
    const std::string text = summary_json(cfg, 42, mc, nullptr, outcomes, 1.0);
    CHECK(text.find("\"verdicts\"") != std::string::npos);
    CHECK(text.find("\"marginals\"") != std::string::npos);
}

TEST_CASE("lemma-basic residual bound on a small run") {
    auto cfg = rademacher_config(16, 4, 10000);
    cfg.checks.lemma_basic = true;
    cfg.bootstrap_resamples = 200;
    auto plan = kmt::coupling::ConstructionPlan(cfg.build_laws(), cfg.n_min);
    auto battery = kmt::haar::make_battery(cfg.battery);
    auto mc = run_mc(cfg, plan, battery);
    REQUIRE(!mc.diag_samples.empty());
    auto check = check_lemma_basic(cfg, mc);
    CHECK(check.pass);
    CHECK(check.worst_margin >= 0.0);

    // tail curves in the summary are nonincreasing in x
    CheckOutcomes outcomes = run_checks(cfg, mc, nullptr);
    const std::string text = summary_json(cfg, 1, mc, nullptr, outcomes, 0.0);
    const auto pos = text.find("\"battery_max\"");
    CHECK(pos != std::string::npos);
    auto tail_at = [&](const std::string& t, std::size_t from) {
        std::vector<double> v;
        auto p1 = t.find("\"tail\"", from);
        auto lb = t.find('[', p1);
        auto rb = t.find(']', lb);
        std::string body = t.substr(lb + 1, rb - lb - 1);
        for (std::size_t i = 0; i < body.size();) {
            auto j = body.find(',', i);
            if (j == std::string::npos) j = body.size();
            v.push_back(std::stod(body.substr(i, j - i)));
            i = j + 1;
        }
        return v;
    };
    auto tail = tail_at(text, pos);
    for (std::size_t i = 1; i < tail.size(); ++i) CHECK(tail[i] <= tail[i - 1]);
}

TEST_CASE("mgf check rejects undersized runs") {
    auto cfg = rademacher_config(16, 4, 500);
    auto plan = kmt::coupling::ConstructionPlan(cfg.build_laws(), cfg.n_min);
    auto battery = kmt::haar::make_battery(cfg.battery);
    auto mc = run_mc(cfg, plan, battery);
    CHECK_THROWS_AS(check_theorem_bound(cfg, mc), std::invalid_argument);
}

TEST_CASE("lemma a3: single Rademacher closed form") {
    std::vector<LatticeGaussianMixture> laws = {LatticeGaussianMixture::rademacher()};
    auto res = check_lemma_a3(laws, 0.567143, 2000, 9);
    const double c1 = 0.25 * (0.567143 / 3.0);
    CHECK(res.c1 == doctest::Approx(c1));
    // |S| = 1 <= Bn^2 = 1 always, so the estimate is exactly exp(c1)
    CHECK(res.estimate == doctest::Approx(std::exp(c1)).epsilon(1e-12));
    CHECK(res.bound == doctest::Approx(1.0 + 2.0 / c1));
    CHECK(res.pass);
}

TEST_CASE("lemma a3: mixed summands stay under the bound") {
    std::vector<LatticeGaussianMixture> laws;
    for (int i = 0; i < 64; ++i)
        laws.push_back(i % 2 ? LatticeGaussianMixture::gaussian(1.0)
                             : LatticeGaussianMixture::rademacher());
    auto res = check_lemma_a3(laws, 0.3, 20000, 10);
    CHECK(res.pass);
    CHECK(res.estimate < res.bound);
}

TEST_CASE("sign symmetry on a mirrored battery") {
    auto cfg = rademacher_config(16, 4, 4000);
    cfg.battery.count = 3;
    cfg.battery.mirrored = true;
    auto plan = kmt::coupling::ConstructionPlan(cfg.build_laws(), cfg.n_min);
    auto battery = kmt::haar::make_battery(cfg.battery);
    REQUIRE(battery.size() == 6);
    auto mc = run_mc(cfg, plan, battery);
    auto sym = check_sign_symmetry(cfg, mc);
    CHECK(sym.pass);
}

TEST_CASE("baseline variance matches the independence formula") {
    auto cfg = rademacher_config(16, 4, 20000);
    auto plan = kmt::coupling::ConstructionPlan(cfg.build_laws(), cfg.n_min);
    // hand battery: the constant L/2 function
    kmt::haar::HolderCertificate cert;
    cert.sup_norm = 0.5;
    cert.margin = 1.0;
    std::vector<kmt::haar::HolderFunction> battery;
    battery.emplace_back("const_half", [](double) { return 0.5; }, 1.0, cert);
    auto base = baseline_independent(cfg, plan, battery);
    const auto& s = base.s_samples[0];
    double acc = 0.0, acc2 = 0.0;
    for (double v : s) {
        acc += v;
        acc2 += v * v;
    }
    const double mean = acc / s.size();
    const double var = acc2 / s.size() - mean * mean;
    // Var = (L/2)^2 * 2n = 0.25 * 32 = 8
    CHECK(var == doctest::Approx(8.0).epsilon(0.05));

    // construction arm dominates the baseline in coupling quality
    cfg.checks.identities = false;
    auto mc = run_mc(cfg, plan, battery);
    auto dom = check_dominance(cfg, mc, base);
    CHECK(dom.pass);
}

TEST_CASE("config json round trip with strict keys") {
    const char* text = R"({
      "model": {
        "catalog": [{"name":"rademacher","step":2.0,"origin":-1.0,
                     "atoms":[[-1.0,0.5],[1.0,0.5]],"gaussian_variance":0.0}],
        "assignment": ["rademacher"],
        "lambda": 0.5,
        "lambda_n": 1.0
      },
      "blocking": {"n": 32, "n_min": 4},
      "functions": {"count": 8, "L": 1.0, "seed": 5},
      "experiment": {"replications": 100, "seed": 7,
                     "checks": {"theorem_mgf": false}},
      "output": {"dir": "scratch"}
    })";
    auto parsed = parse_config(text);
    CHECK(parsed.experiment.n == 32);
    CHECK(parsed.experiment.battery.count == 8);
    CHECK(parsed.output.dir == "scratch");
    auto laws = parsed.experiment.build_laws();
    CHECK(laws.size() == 32);
    CHECK(laws[7].variance() == doctest::Approx(1.0));

    // key reordering leaves the hash unchanged
    const char* reordered = R"({
      "output": {"dir": "scratch"},
      "blocking": {"n_min": 4, "n": 32},
      "functions": {"seed": 5, "L": 1.0, "count": 8},
      "experiment": {"seed": 7, "replications": 100,
                     "checks": {"theorem_mgf": false}},
      "model": {
        "lambda_n": 1.0,
        "lambda": 0.5,
        "assignment": ["rademacher"],
        "catalog": [{"name":"rademacher","step":2.0,"origin":-1.0,
                     "atoms":[[-1.0,0.5],[1.0,0.5]],"gaussian_variance":0.0}]
      }
    })";
    CHECK(config_hash(text) == config_hash(reordered));

    std::string bad = text;
    bad.replace(bad.find("\"n\": 32"), 7, "\"nn\": 32");
    CHECK_THROWS_AS(parse_config(bad), std::invalid_argument);
}

TEST_CASE("hypothesis audit") {
    auto cfg = rademacher_config(32, 4, 100);
    cfg.lambda = 0.5;
    auto rep = check_hypotheses(cfg);
    CHECK(rep.all_ok());
    REQUIRE(rep.laws.size() == 1);
    CHECK(rep.laws[0].lambda_star == doctest::Approx(0.5671432904).epsilon(1e-6));

    cfg.lambda = 0.6;
    auto warn = check_hypotheses(cfg);
    CHECK_FALSE(warn.all_ok());
    CHECK_FALSE(warn.laws[0].ok);

    cfg.lambda = 0.5;
    cfg.n_min = 2;  // violates the block-size hypothesis for equal variances
    auto bad = check_hypotheses(cfg);
    CHECK_FALSE(bad.n_min_ok);
}

TEST_SUITE_END();
