#include "kmt/harness/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "kmt/math/stats.hpp"

namespace kmt::harness {

namespace {

constexpr std::int64_t kBlockSize = 256;
constexpr std::size_t kViolationCap = 1000;

struct MarginalCells {
    bool discrete = false;
    const dist::LatticeGaussianMixture* law = nullptr;
    std::vector<double> cuts;   // quantile cut points for smooth laws
    std::vector<double> probs;  // cell probabilities

    int cell_of(double x) const {
        if (discrete) {
            const std::int64_t idx = static_cast<std::int64_t>(
                std::llround((x - law->origin()) / law->step()));
            auto hit = law->atom_at(idx);
            if (!hit ||
                std::fabs(x - law->position(idx)) > 1e-9 * law->step())
                return static_cast<int>(probs.size()) - 1;  // dead cell
            return static_cast<int>(*hit);
        }
        return static_cast<int>(
            std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
    }
};

MarginalCells make_cells(const dist::LatticeGaussianMixture& law) {
    MarginalCells c;
    c.law = &law;
    if (law.purely_discrete()) {
        c.discrete = true;
        for (const auto& a : law.atoms()) c.probs.push_back(a.weight);
        c.probs.push_back(0.0);  // dead cell for off-support hits
        return c;
    }
    const int cells = 32;
    for (int l = 1; l < cells; ++l) c.cuts.push_back(law.quantile(l / double(cells)));
    c.probs.assign(cells, 1.0 / cells);
    return c;
}

struct BlockPartial {
    std::int64_t aborted = 0;
    double worst_tree = 0.0, worst_disagg = 0.0, worst_tele = 0.0;
    std::vector<std::int64_t> marg_counts;
    std::vector<double> corr_sum, corr_sum2, corr_cross;
    std::int64_t proviso = 0, violation_count = 0;
    std::vector<ViolationRecord> violations;
};

std::vector<DiagNodeId> enumerate_diag_nodes(int depth) {
    std::vector<DiagNodeId> nodes;
    for (int m = 0; m <= depth; ++m) {
        nodes.push_back({m, -1, 0});
        for (int k = 0; k < m; ++k)
            for (int j = 1; j <= (1 << k); ++j) nodes.push_back({m, k, j});
    }
    return nodes;
}

std::vector<double> ok_values(const std::vector<double>& samples,
                              const std::vector<char>& ok) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r)
        if (ok[r]) out.push_back(samples[r]);
    return out;
}

double log2n_norm(int n) {
    const double ln = std::log(static_cast<double>(n));
    return ln * ln;
}

McResult run_arm(const ExperimentConfig& config, const coupling::ConstructionPlan& plan,
                 const std::vector<haar::HolderFunction>& battery, bool construction_arm) {
    const int n = config.n;
    const std::int64_t reps = config.replications;
    const std::size_t nf = battery.size();
    const auto laws = config.build_laws();
    std::vector<double> sd(n);
    for (int i = 0; i < n; ++i) sd[i] = std::sqrt(laws[i].variance());

    // battery values on the design grid
    std::vector<std::vector<double>> fvals(nf, std::vector<double>(n));
    for (std::size_t f = 0; f < nf; ++f)
        for (int i = 0; i < n; ++i) fvals[f][i] = battery[f]((i + 1) / double(n));

    const CheckSettings& checks = config.checks;
    const bool need_diag =
        construction_arm &&
        (checks.lemma_basic || checks.correlations || config.retain_levels);
    const bool need_levels = construction_arm && (need_diag || checks.identities ||
                                                  checks.quantile_monitor);
    const bool need_marginals = construction_arm && checks.marginals;
    const bool need_corr = construction_arm && checks.correlations;
    if (need_corr && n > 64)
        throw std::invalid_argument(
            "run_mc: the pairwise correlation check is limited to n <= 64");

    McResult mc;
    mc.replications = reps;
    for (const auto& f : battery) mc.fn_ids.push_back(f.id());
    mc.s_samples.assign(nf, std::vector<double>(reps, 0.0));
    mc.max_abs_s.assign(reps, 0.0);
    mc.ok.assign(reps, 0);

    std::vector<MarginalCells> cells;
    std::vector<int> cell_offset;
    int total_cells = 0;
    if (need_marginals) {
        for (int i = 0; i < n; ++i) {
            cells.push_back(make_cells(laws[i]));
            cell_offset.push_back(total_cells);
            total_cells += static_cast<int>(cells.back().probs.size());
        }
    }
    if (need_diag) {
        mc.diag_nodes = enumerate_diag_nodes(plan.depth());
        mc.diag_samples.assign(mc.diag_nodes.size(), std::vector<double>(reps, 0.0));
    }
    std::vector<int> diag_base(plan.depth() + 1, 0);
    for (int m = 1; m <= plan.depth(); ++m)
        diag_base[m] = diag_base[m - 1] + 1 + ((1 << (m - 1)) - 1);

    const std::int64_t nblocks = (reps + kBlockSize - 1) / kBlockSize;
    std::vector<BlockPartial> partials(nblocks);

    const math::Stream stream =
        construction_arm ? math::Stream::construction : math::Stream::baseline;

    auto worker = [&](std::atomic<std::int64_t>& next) {
        coupling::Workspace ws;
        std::vector<double> gaussians(n), delta(n), x(n);
        for (std::int64_t b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) {
            BlockPartial& bp = partials[b];
            if (need_marginals) bp.marg_counts.assign(total_cells, 0);
            if (need_corr) {
                bp.corr_sum.assign(n, 0.0);
                bp.corr_sum2.assign(n, 0.0);
                bp.corr_cross.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0.0);
            }
            const std::int64_t lo = b * kBlockSize;
            const std::int64_t hi = std::min(reps, lo + kBlockSize);
            for (std::int64_t rep = lo; rep < hi; ++rep) {
                math::RandomStream rs(config.seed, stream, rep);
                for (int i = 0; i < n; ++i) gaussians[i] = sd[i] * rs.gaussian();
                coupling::CouplingOutput out;
                if (construction_arm) {
                    try {
                        out = coupling::run_construction(plan, gaussians, need_levels, &ws);
                    } catch (const std::runtime_error&) {
                        ++bp.aborted;
                        continue;
                    }
                    for (int i = 0; i < n; ++i) x[i] = out.x_tilde[i];
                } else {
                    for (int i = 0; i < n; ++i) {
                        const double u = rs.uniform();
                        const double z = laws[i].purely_discrete() ? 0.0 : rs.gaussian();
                        x[i] = laws[i].sample(u, z);
                    }
                }
                mc.ok[rep] = 1;
                for (int i = 0; i < n; ++i) delta[i] = x[i] - gaussians[i];
                double max_abs = 0.0;
                for (std::size_t f = 0; f < nf; ++f) {
                    double s = 0.0;
                    for (int i = 0; i < n; ++i) s += fvals[f][i] * delta[i];
                    mc.s_samples[f][rep] = s;
                    max_abs = std::max(max_abs, std::fabs(s));
                }
                mc.max_abs_s[rep] = max_abs;

                if (need_marginals)
                    for (int i = 0; i < n; ++i)
                        ++bp.marg_counts[cell_offset[i] + cells[i].cell_of(x[i])];
                if (need_corr) {
                    std::size_t pair = 0;
                    for (int i = 0; i < n; ++i) {
                        bp.corr_sum[i] += x[i];
                        bp.corr_sum2[i] += x[i] * x[i];
                        for (int jj = i + 1; jj < n; ++jj)
                            bp.corr_cross[pair++] += x[i] * x[jj];
                    }
                }

                if (!construction_arm || !need_levels) continue;
                for (const auto& st : out.levels) {
                    const int m = st.m;
                    const auto& lp = plan.levels()[m];
                    if (checks.identities) {
                        for (int k = 0; k < m; ++k)
                            for (int j = 1; j <= (1 << k); ++j) {
                                const int node = coupling::ConstructionPlan::heap_offset(k, j);
                                const int left =
                                    coupling::ConstructionPlan::heap_offset(k + 1, 2 * j - 1);
                                const int right =
                                    coupling::ConstructionPlan::heap_offset(k + 1, 2 * j);
                                bp.worst_tree = std::max(
                                    bp.worst_tree,
                                    std::fabs(st.y_node[node].value - st.y_node[left].value -
                                              st.y_node[right].value));
                            }
                        for (int j = 1; j <= (1 << m); ++j) {
                            const auto r = plan.tree().block(m, m, j);
                            double acc = 0.0;
                            for (int i = r.first; i <= r.last; ++i)
                                acc += st.y_leaf[i - 1].value;
                            const int node = coupling::ConstructionPlan::heap_offset(m, j);
                            bp.worst_disagg = std::max(
                                bp.worst_disagg, std::fabs(acc - st.y_node[node].value));
                        }
                    }
                    if (need_diag || checks.quantile_monitor) {
                        auto diag = coupling::level_diagnostics(st);
                        if (need_diag) {
                            mc.diag_samples[diag_base[m]][rep] = diag.s0;
                            for (std::size_t nd = 0; nd < diag.s_kj.size(); ++nd)
                                mc.diag_samples[diag_base[m] + 1 + nd][rep] = diag.s_kj[nd];
                        }
                        if (checks.quantile_monitor) {
                            const double c1 = config.monitor_c1;
                            const double c2 = config.monitor_c2;
                            const double c3 = config.monitor_c3;
                            const double b0 = lp.node_vars[0];
                            const double y0 = st.y_node[0].value;
                            if (std::fabs(y0) <= c2 * b0 && b0 >= c3) {
                                ++bp.proviso;
                                const double bound = c1 * (1.0 + y0 * y0 / b0);
                                if (std::fabs(diag.s0) > bound) {
                                    ++bp.violation_count;
                                    if (bp.violations.size() < kViolationCap)
                                        bp.violations.push_back({rep, m, -1, 0, diag.s0,
                                                                 bound, y0, 0.0, b0, 0.0});
                                }
                            }
                            for (int k = 0; k < m; ++k)
                                for (int j = 1; j <= (1 << k); ++j) {
                                    const int node =
                                        coupling::ConstructionPlan::heap_offset(k, j);
                                    const int left = coupling::ConstructionPlan::heap_offset(
                                        k + 1, 2 * j - 1);
                                    const int right =
                                        coupling::ConstructionPlan::heap_offset(k + 1, 2 * j);
                                    const double bl = lp.node_vars[left];
                                    const double br = lp.node_vars[right];
                                    const double yl = st.y_node[left].value;
                                    const double yr = st.y_node[right].value;
                                    if (std::fabs(yl) <= c2 * bl &&
                                        std::fabs(yr) <= c2 * br && bl >= c3 && br >= c3) {
                                        ++bp.proviso;
                                        const double bound =
                                            c1 * (1.0 + yl * yl / bl + yr * yr / br);
                                        if (std::fabs(diag.s_kj[node]) > bound) {
                                            ++bp.violation_count;
                                            if (bp.violations.size() < kViolationCap)
                                                bp.violations.push_back(
                                                    {rep, m, k, j, diag.s_kj[node], bound,
                                                     yl, yr, bl, br});
                                        }
                                    }
                                }
                        }
                    }
                }
                if (checks.identities) {
                    for (std::size_t f = 0; f < nf; ++f) {
                        double rhs = 0.0;
                        for (const auto& st : out.levels) {
                            const int m = st.m;
                            const int count = plan.levels()[m].count;
                            for (int i = 1; i <= count; ++i) {
                                const int orig = plan.tree().original_index(m, i);
                                rhs += fvals[f][orig - 1] *
                                       (st.y_leaf[i - 1].value - st.w_leaf[i - 1]);
                            }
                        }
                        bp.worst_tele = std::max(
                            bp.worst_tele, std::fabs(mc.s_samples[f][rep] - rhs));
                    }
                }
            }
        }
    };

    const int nworkers = std::max(1, std::min<int>(config.resolved_workers(),
                                                   static_cast<int>(nblocks)));
    std::atomic<std::int64_t> next{0};
    if (nworkers == 1) {
        worker(next);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nworkers);
        for (int t = 0; t < nworkers; ++t) pool.emplace_back([&] { worker(next); });
        for (auto& th : pool) th.join();
    }

    // merge block partials in block order
    if (need_marginals) {
        mc.marginal_counts.resize(n);
        mc.marginal_probs.resize(n);
        for (int i = 0; i < n; ++i) {
            mc.marginal_probs[i] = cells[i].probs;
            mc.marginal_counts[i].assign(cells[i].probs.size(), 0);
        }
    }
    if (need_corr) {
        mc.have_correlations = true;
        mc.corr_sum.assign(n, 0.0);
        mc.corr_sum2.assign(n, 0.0);
        mc.corr_cross.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0.0);
    }
    for (const BlockPartial& bp : partials) {
        mc.aborted += bp.aborted;
        mc.worst_tree_gap = std::max(mc.worst_tree_gap, bp.worst_tree);
        mc.worst_disagg_gap = std::max(mc.worst_disagg_gap, bp.worst_disagg);
        mc.worst_telescope_gap = std::max(mc.worst_telescope_gap, bp.worst_tele);
        if (need_marginals && !bp.marg_counts.empty())
            for (int i = 0; i < n; ++i)
                for (std::size_t c = 0; c < mc.marginal_counts[i].size(); ++c)
                    mc.marginal_counts[i][c] += bp.marg_counts[cell_offset[i] + c];
        if (need_corr && !bp.corr_sum.empty()) {
            for (int i = 0; i < n; ++i) {
                mc.corr_sum[i] += bp.corr_sum[i];
                mc.corr_sum2[i] += bp.corr_sum2[i];
            }
            for (std::size_t p = 0; p < mc.corr_cross.size(); ++p)
                mc.corr_cross[p] += bp.corr_cross[p];
        }
        mc.proviso_count += bp.proviso;
        mc.violation_count += bp.violation_count;
        for (const auto& v : bp.violations)
            if (mc.violations.size() < kViolationCap) mc.violations.push_back(v);
    }
    return mc;
}

}  // namespace

McResult run_mc(const ExperimentConfig& config, const coupling::ConstructionPlan& plan,
                const std::vector<haar::HolderFunction>& battery) {
    McResult mc = run_arm(config, plan, battery, true);
    const double abort_rate =
        static_cast<double>(mc.aborted) / static_cast<double>(config.replications);
    if (abort_rate > 0.001)
        throw std::runtime_error("run_mc: " + std::to_string(mc.aborted) +
                                 " replications aborted (rate above 0.1%)");
    return mc;
}

McResult baseline_independent(const ExperimentConfig& config,
                              const coupling::ConstructionPlan& plan,
                              const std::vector<haar::HolderFunction>& battery) {
    return run_arm(config, plan, battery, false);
}

MarginalCheck check_marginals(const ExperimentConfig& config, const McResult& mc) {
    MarginalCheck out;
    if (mc.marginal_counts.empty())
        throw std::invalid_argument("check_marginals: no marginal counts collected");
    out.alpha_per_index = 1e-3 / config.n;
    for (int i = 0; i < config.n; ++i) {
        auto gof = math::chi_square_gof(mc.marginal_counts[i], mc.marginal_probs[i]);
        if (gof.p_value < out.min_p) {
            out.min_p = gof.p_value;
            out.worst_index = i + 1;
        }
    }
    out.pass = out.min_p >= out.alpha_per_index;
    return out;
}

CorrelationCheck check_correlations(const ExperimentConfig& config, const McResult& mc) {
    CorrelationCheck out;
    if (!mc.have_correlations)
        throw std::invalid_argument("check_correlations: correlations not collected");
    const std::int64_t R = config.replications - mc.aborted;
    out.threshold = 4.0 / std::sqrt(static_cast<double>(R));
    const int n = config.n;
    std::size_t pair = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++pair) {
            const double c = math::correlation_from_sums(
                mc.corr_sum[i], mc.corr_sum[j], mc.corr_sum2[i], mc.corr_sum2[j],
                mc.corr_cross[pair], R);
            out.max_abs_sequence = std::max(out.max_abs_sequence, std::fabs(c));
        }
    // residuals across j at fixed (m, k)
    for (std::size_t a = 0; a < mc.diag_nodes.size(); ++a) {
        if (mc.diag_nodes[a].k < 0) continue;
        for (std::size_t b = a + 1; b < mc.diag_nodes.size(); ++b) {
            if (mc.diag_nodes[b].m != mc.diag_nodes[a].m ||
                mc.diag_nodes[b].k != mc.diag_nodes[a].k)
                break;
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            std::int64_t cnt = 0;
            for (std::size_t r = 0; r < mc.ok.size(); ++r) {
                if (!mc.ok[r]) continue;
                const double va = mc.diag_samples[a][r];
                const double vb = mc.diag_samples[b][r];
                sa += va;
                sb += vb;
                saa += va * va;
                sbb += vb * vb;
                sab += va * vb;
                ++cnt;
            }
            const double c = math::correlation_from_sums(sa, sb, saa, sbb, sab, cnt);
            out.max_abs_residual = std::max(out.max_abs_residual, std::fabs(c));
        }
    }
    out.pass = out.max_abs_sequence <= out.threshold &&
               out.max_abs_residual <= out.threshold;
    return out;
}

namespace {

MgfCheck mgf_bound_over_units(const ExperimentConfig& config,
                              const std::vector<std::string>& unit_ids,
                              const std::vector<std::vector<double>>& samples,
                              const std::vector<char>& ok, double normalization) {
    MgfCheck out;
    const auto t_grid = config.t_grid();
    bool first = true;
    for (std::size_t u = 0; u < samples.size(); ++u) {
        const std::vector<double> s = ok_values(samples[u], ok);
        if (s.size() < 10000)
            throw std::invalid_argument("mgf check: needs at least 10^4 replications");
        std::vector<double> e(s.size());
        for (double t : t_grid) {
            if (std::fabs(t) > config.t_max) continue;
            for (std::size_t r = 0; r < s.size(); ++r)
                e[r] = std::exp(std::min(700.0, t * s[r] / normalization));
            const double adjusted = math::bootstrap_mean_percentile(
                e, config.bootstrap_resamples, 0.01,
                math::substream_seed(config.seed, 9001, u * 1000 + static_cast<std::uint64_t>(
                                                           (t + 10.0) * 1024.0)));
            const double margin = std::exp(config.mgf_c2 * t * t) - adjusted;
            if (first || margin < out.worst_margin) {
                out.worst_margin = margin;
                out.worst_unit = unit_ids[u];
                out.worst_t = t;
                first = false;
            }
        }
    }
    out.pass = !first && out.worst_margin >= 0.0;
    return out;
}

}  // namespace

MgfCheck check_theorem_bound(const ExperimentConfig& config, const McResult& mc) {
    return mgf_bound_over_units(config, mc.fn_ids, mc.s_samples, mc.ok,
                                log2n_norm(config.n));
}

MgfCheck check_lemma_basic(const ExperimentConfig& config, const McResult& mc) {
    if (mc.diag_samples.empty())
        throw std::invalid_argument("check_lemma_basic: diagnostics were not retained");
    std::vector<std::string> ids;
    ids.reserve(mc.diag_nodes.size());
    for (const auto& nd : mc.diag_nodes)
        ids.push_back("m=" + std::to_string(nd.m) +
                      (nd.k < 0 ? ",top" : ",k=" + std::to_string(nd.k) +
                                               ",j=" + std::to_string(nd.j)));
    return mgf_bound_over_units(config, ids, mc.diag_samples, mc.ok, 1.0);
}

TailFit tail_decay_fit(const ExperimentConfig& config, const McResult& mc) {
    TailFit out;
    const auto xg = config.x_grid();
    const std::vector<double> samples = ok_values(mc.max_abs_s, mc.ok);
    const double norm = log2n_norm(config.n) / config.lambda_n;
    std::vector<double> xs, ys;
    bool any = false;
    for (double x : xg) {
        std::int64_t count = 0;
        for (double s : samples)
            if (s > x * norm) ++count;
        if (count > 0) {
            any = true;
            xs.push_back(x);
            ys.push_back(std::log(static_cast<double>(count) /
                                  static_cast<double>(samples.size())));
        }
    }
    if (!any) {
        out.no_mass = true;
        out.pass = true;
        return out;
    }
    out.usable_points = static_cast<int>(xs.size());
    if (out.usable_points < 5)
        throw std::runtime_error("tail_decay_fit: fewer than 5 occupied grid points");
    auto fit = math::fit_line(xs, ys);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.r_squared = fit.r_squared;
    out.pass = fit.slope < 0.0 && fit.r_squared >= 0.9;
    return out;
}

SignSymmetryCheck check_sign_symmetry(const ExperimentConfig& config, const McResult& mc) {
    SignSymmetryCheck out;
    if (!config.battery.mirrored || mc.fn_ids.size() % 2 != 0)
        throw std::invalid_argument("check_sign_symmetry: needs a mirrored battery");
    const std::size_t half = mc.fn_ids.size() / 2;
    for (std::size_t f = 0; f < half; ++f) {
        const auto a_all = ok_values(mc.s_samples[f], mc.ok);
        const auto b_all = ok_values(mc.s_samples[f + half], mc.ok);
        const std::size_t cut = a_all.size() / 2;
        std::vector<double> a(a_all.begin(), a_all.begin() + cut);
        std::vector<double> b;
        for (std::size_t r = cut; r < b_all.size(); ++r) b.push_back(-b_all[r]);
        if (a.empty() || b.empty()) continue;
        const auto ks = math::ks_two_sample(std::move(a), std::move(b));
        out.min_p = std::min(out.min_p, ks.p_value);
    }
    out.pass = out.min_p >= 1e-3;
    return out;
}

DominanceCheck check_dominance(const ExperimentConfig& config, const McResult& construction,
                               const McResult& baseline) {
    DominanceCheck out;
    const auto xg = config.x_grid();
    const double norm = log2n_norm(config.n) / config.lambda_n;
    for (std::size_t f = 0; f < construction.s_samples.size(); ++f) {
        const auto sc = ok_values(construction.s_samples[f], construction.ok);
        const auto sb = ok_values(baseline.s_samples[f], baseline.ok);
        for (double x : xg) {
            std::int64_t cc = 0, cb = 0;
            for (double v : sc)
                if (std::fabs(v) > x * norm) ++cc;
            for (double v : sb)
                if (std::fabs(v) > x * norm) ++cb;
            const double pc = static_cast<double>(cc) / sc.size();
            const double pb = static_cast<double>(cb) / sb.size();
            const double se = std::sqrt(pc * (1.0 - pc) / sc.size() +
                                        pb * (1.0 - pb) / sb.size());
            out.worst_excess = std::max(out.worst_excess, pc - pb - 3.0 * se);
        }
    }
    out.pass = out.worst_excess <= 0.0;
    return out;
}

QuantileMonitorCheck check_quantile_monitor(const McResult& mc) {
    QuantileMonitorCheck out;
    out.proviso_count = mc.proviso_count;
    out.violation_count = mc.violation_count;
    out.violation_rate =
        mc.proviso_count > 0
            ? static_cast<double>(mc.violation_count) / mc.proviso_count
            : 0.0;
    out.pass = out.violation_rate <= 0.001;
    return out;
}

LemmaA3Check check_lemma_a3(std::span<const dist::LatticeGaussianMixture> laws,
                            double lambda, std::int64_t replications,
                            std::uint64_t seed) {
    LemmaA3Check out;
    out.c1 = 0.25 * std::min(lambda / 3.0, 0.5);
    out.bound = 1.0 + 2.0 / out.c1;
    double bn2 = 0.0;
    for (const auto& law : laws) bn2 += law.variance();
    const double bn = std::sqrt(bn2);
    double acc = 0.0, acc2 = 0.0;
    for (std::int64_t rep = 0; rep < replications; ++rep) {
        math::RandomStream rs(seed, math::Stream::direct_sum, rep);
        double s = 0.0;
        for (const auto& law : laws) {
            const double u = rs.uniform();
            const double z = law.purely_discrete() ? 0.0 : rs.gaussian();
            s += law.sample(u, z);
        }
        const double trunc = (std::fabs(s) <= bn2) ? s : 0.0;
        const double v = std::exp(out.c1 * (trunc / bn) * (trunc / bn));
        acc += v;
        acc2 += v * v;
    }
    out.estimate = acc / replications;
    const double var = std::max(0.0, acc2 / replications - out.estimate * out.estimate);
    out.standard_error = std::sqrt(var / replications);
    out.pass = out.estimate <= out.bound + 3.0 * out.standard_error;
    return out;
}

double median_max_abs(const McResult& mc) {
    return math::sample_median(ok_values(mc.max_abs_s, mc.ok));
}

}  // namespace kmt::harness
