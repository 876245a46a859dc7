#include "kmt/harness/summary.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "kmt/math/stats.hpp"

namespace kmt::harness {

namespace {

using nlohmann::json;

std::vector<double> ok_values(const std::vector<double>& samples,
                              const std::vector<char>& ok) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r)
        if (ok[r]) out.push_back(samples[r]);
    return out;
}

std::vector<double> tail_curve(const std::vector<double>& abs_samples,
                               const std::vector<double>& xg, double norm) {
    std::vector<double> out;
    out.reserve(xg.size());
    for (double x : xg) {
        std::int64_t c = 0;
        for (double v : abs_samples)
            if (std::fabs(v) > x * norm) ++c;
        out.push_back(static_cast<double>(c) / static_cast<double>(abs_samples.size()));
    }
    return out;
}

}  // namespace

bool CheckOutcomes::all_pass() const {
    if (!failure_note.empty()) return false;
    if (identities_checked && !identities_pass) return false;
    if (marginals && !marginals->pass) return false;
    if (correlations && !correlations->pass) return false;
    if (theorem && !theorem->pass) return false;
    if (lemma_basic && !lemma_basic->pass) return false;
    if (tail && !tail->pass) return false;
    if (sign_symmetry && !sign_symmetry->pass) return false;
    if (dominance && !dominance->pass) return false;
    if (monitor && !monitor->pass) return false;
    if (lemma_a3 && !lemma_a3->pass) return false;
    return true;
}

CheckOutcomes run_checks(const ExperimentConfig& config, const McResult& construction,
                         const McResult* baseline) {
    CheckOutcomes out;
    const CheckSettings& c = config.checks;
    if (c.identities) {
        out.identities_checked = true;
        out.identities_pass = construction.worst_tree_gap <= 1e-10 &&
                              construction.worst_disagg_gap <= 1e-10 &&
                              construction.worst_telescope_gap <= 1e-9;
    }
    try {
        if (c.marginals) out.marginals = check_marginals(config, construction);
        if (c.correlations) out.correlations = check_correlations(config, construction);
        if (c.theorem_mgf) out.theorem = check_theorem_bound(config, construction);
        if (c.lemma_basic) out.lemma_basic = check_lemma_basic(config, construction);
        if (c.tail_fit) out.tail = tail_decay_fit(config, construction);
        if (c.sign_symmetry) out.sign_symmetry = check_sign_symmetry(config, construction);
        if (c.quantile_monitor) out.monitor = check_quantile_monitor(construction);
        if (c.dominance && baseline)
            out.dominance = check_dominance(config, construction, *baseline);
        if (c.lemma_a3) {
            auto laws = config.build_laws();
            out.lemma_a3 = check_lemma_a3(laws, config.lambda, 1000000, config.seed);
        }
    } catch (const std::exception& e) {
        out.failure_note = e.what();
    }
    return out;
}

std::string summary_json(const ExperimentConfig& config, std::uint64_t config_hash,
                         const McResult& construction, const McResult* baseline,
                         const CheckOutcomes& outcomes, double elapsed_seconds) {
    json j;
    j["config"] = {{"n", config.n},
                   {"n_min", config.n_min},
                   {"lambda", config.lambda},
                   {"lambda_n", config.lambda_n},
                   {"replications", config.replications},
                   {"battery_count", config.battery.count},
                   {"battery_mirrored", config.battery.mirrored},
                   {"L", config.battery.L},
                   {"hash", config_hash}};
    j["seed"] = config.seed;
    j["replications"] = construction.replications;
    j["aborted"] = construction.aborted;

    const double norm_mgf = std::log(double(config.n)) * std::log(double(config.n));
    const double norm_tail = norm_mgf / config.lambda_n;
    const auto xg = config.x_grid();
    const auto tg = config.t_grid();
    j["x_grid"] = xg;
    j["t_grid"] = tg;

    json fns = json::array();
    for (std::size_t f = 0; f < construction.fn_ids.size(); ++f) {
        const auto s = ok_values(construction.s_samples[f], construction.ok);
        json e;
        e["id"] = construction.fn_ids[f];
        e["mean"] = math::sample_mean(s);
        e["tail"] = tail_curve(s, xg, norm_tail);
        std::vector<double> mgf;
        mgf.reserve(tg.size());
        for (double t : tg) {
            double acc = 0.0;
            for (double v : s) acc += std::exp(std::min(700.0, t * v / norm_mgf));
            mgf.push_back(acc / static_cast<double>(s.size()));
        }
        e["mgf"] = mgf;
        fns.push_back(e);
    }
    j["functions"] = fns;
    {
        const auto s = ok_values(construction.max_abs_s, construction.ok);
        j["battery_max"] = {{"median", math::sample_median(s)},
                            {"tail", tail_curve(s, xg, norm_tail)}};
    }
    if (baseline) {
        const auto s = ok_values(baseline->max_abs_s, baseline->ok);
        j["baseline_max"] = {{"median", math::sample_median(s)},
                             {"tail", tail_curve(s, xg, norm_tail)}};
    }
    if (!construction.marginal_counts.empty()) {
        json per_index = json::array();
        for (std::size_t i = 0; i < construction.marginal_counts.size(); ++i) {
            auto gof = math::chi_square_gof(construction.marginal_counts[i],
                                            construction.marginal_probs[i]);
            per_index.push_back({{"index", i + 1},
                                 {"statistic", gof.statistic},
                                 {"dof", gof.dof},
                                 {"p_value", gof.p_value}});
        }
        j["marginal_gof"] = per_index;
    }
    if (!construction.diag_samples.empty()) {
        json nodes = json::array();
        for (std::size_t d = 0; d < construction.diag_nodes.size(); ++d) {
            const auto s = ok_values(construction.diag_samples[d], construction.ok);
            std::vector<double> mgf;
            mgf.reserve(tg.size());
            for (double t : tg) {
                double acc = 0.0;
                for (double v : s) acc += std::exp(std::min(700.0, t * v));
                mgf.push_back(acc / static_cast<double>(s.size()));
            }
            nodes.push_back({{"m", construction.diag_nodes[d].m},
                             {"k", construction.diag_nodes[d].k},
                             {"j", construction.diag_nodes[d].j},
                             {"mgf", mgf}});
        }
        j["residual_mgf"] = nodes;
    }

    json v;
    v["all_pass"] = outcomes.all_pass();
    if (!outcomes.failure_note.empty()) v["failure_note"] = outcomes.failure_note;
    if (outcomes.identities_checked)
        v["identities"] = {{"pass", outcomes.identities_pass},
                           {"worst_tree_gap", construction.worst_tree_gap},
                           {"worst_disagg_gap", construction.worst_disagg_gap},
                           {"worst_telescope_gap", construction.worst_telescope_gap}};
    if (outcomes.marginals)
        v["marginals"] = {{"pass", outcomes.marginals->pass},
                          {"min_p", outcomes.marginals->min_p},
                          {"worst_index", outcomes.marginals->worst_index},
                          {"alpha_per_index", outcomes.marginals->alpha_per_index}};
    if (outcomes.correlations)
        v["correlations"] = {{"pass", outcomes.correlations->pass},
                             {"max_abs_sequence", outcomes.correlations->max_abs_sequence},
                             {"max_abs_residual", outcomes.correlations->max_abs_residual},
                             {"threshold", outcomes.correlations->threshold}};
    if (outcomes.theorem)
        v["theorem_mgf"] = {{"pass", outcomes.theorem->pass},
                            {"worst_margin", outcomes.theorem->worst_margin},
                            {"worst_unit", outcomes.theorem->worst_unit},
                            {"worst_t", outcomes.theorem->worst_t},
                            {"c1", config.t_max},
                            {"c2", config.mgf_c2}};
    if (outcomes.lemma_basic)
        v["lemma_basic"] = {{"pass", outcomes.lemma_basic->pass},
                            {"worst_margin", outcomes.lemma_basic->worst_margin},
                            {"worst_unit", outcomes.lemma_basic->worst_unit},
                            {"worst_t", outcomes.lemma_basic->worst_t}};
    if (outcomes.tail)
        v["tail_fit"] = {{"pass", outcomes.tail->pass},
                         {"no_mass", outcomes.tail->no_mass},
                         {"slope", outcomes.tail->slope},
                         {"intercept", outcomes.tail->intercept},
                         {"r_squared", outcomes.tail->r_squared},
                         {"usable_points", outcomes.tail->usable_points}};
    if (outcomes.sign_symmetry)
        v["sign_symmetry"] = {{"pass", outcomes.sign_symmetry->pass},
                              {"min_p", outcomes.sign_symmetry->min_p}};
    if (outcomes.dominance)
        v["dominance"] = {{"pass", outcomes.dominance->pass},
                          {"worst_excess", outcomes.dominance->worst_excess}};
    if (outcomes.monitor) {
        v["quantile_monitor"] = {{"pass", outcomes.monitor->pass},
                                 {"proviso_count", outcomes.monitor->proviso_count},
                                 {"violation_count", outcomes.monitor->violation_count},
                                 {"violation_rate", outcomes.monitor->violation_rate}};
        json viol = json::array();
        for (const auto& rec : construction.violations)
            viol.push_back({{"rep", rec.rep},
                            {"m", rec.m},
                            {"k", rec.k},
                            {"j", rec.j},
                            {"residual", rec.residual},
                            {"bound", rec.bound},
                            {"y_left", rec.y_left},
                            {"y_right", rec.y_right},
                            {"b_left", rec.b_left},
                            {"b_right", rec.b_right}});
        v["quantile_monitor"]["violations"] = viol;
    }
    if (outcomes.lemma_a3)
        v["lemma_a3"] = {{"pass", outcomes.lemma_a3->pass},
                         {"c1", outcomes.lemma_a3->c1},
                         {"estimate", outcomes.lemma_a3->estimate},
                         {"standard_error", outcomes.lemma_a3->standard_error},
                         {"bound", outcomes.lemma_a3->bound}};
    j["verdicts"] = v;
    j["timing"] = {{"elapsed_seconds", elapsed_seconds}};
    return j.dump(2);
}

std::string samples_csv(const McResult& mc) {
    std::ostringstream out;
    out.precision(17);
    out << "rep,function,s_n\n";
    for (std::size_t r = 0; r < mc.ok.size(); ++r) {
        if (!mc.ok[r]) continue;
        for (std::size_t f = 0; f < mc.fn_ids.size(); ++f)
            out << r << "," << mc.fn_ids[f] << "," << mc.s_samples[f][r] << "\n";
    }
    return out.str();
}

std::string diagnostics_csv(const McResult& mc) {
    std::ostringstream out;
    out.precision(17);
    out << "rep,m,k,j,residual\n";
    for (std::size_t r = 0; r < mc.ok.size(); ++r) {
        if (!mc.ok[r]) continue;
        for (std::size_t d = 0; d < mc.diag_nodes.size(); ++d)
            out << r << "," << mc.diag_nodes[d].m << "," << mc.diag_nodes[d].k << ","
                << mc.diag_nodes[d].j << "," << mc.diag_samples[d][r] << "\n";
    }
    return out.str();
}

std::string tail_curves_csv(const ExperimentConfig& config, const McResult& construction,
                            const McResult* baseline) {
    const auto xg = config.x_grid();
    const double norm =
        std::log(double(config.n)) * std::log(double(config.n)) / config.lambda_n;
    std::ostringstream out;
    out.precision(10);
    out << "x";
    for (const auto& id : construction.fn_ids) out << "," << id;
    out << ",battery_max";
    if (baseline) out << ",baseline_max";
    out << "\n";
    std::vector<std::vector<double>> curves;
    for (std::size_t f = 0; f < construction.fn_ids.size(); ++f)
        curves.push_back(
            tail_curve(ok_values(construction.s_samples[f], construction.ok), xg, norm));
    curves.push_back(tail_curve(ok_values(construction.max_abs_s, construction.ok), xg, norm));
    if (baseline)
        curves.push_back(tail_curve(ok_values(baseline->max_abs_s, baseline->ok), xg, norm));
    for (std::size_t i = 0; i < xg.size(); ++i) {
        out << xg[i];
        for (const auto& c : curves) out << "," << c[i];
        out << "\n";
    }
    return out.str();
}

}  // namespace kmt::harness
