#include "kmt/coupling/construction.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kmt/coupling/transforms.hpp"

namespace kmt::coupling {

namespace {
using Law = dist::LatticeGaussianMixture;
using LawPtr = std::shared_ptr<const Law>;

LawPtr make_law(Law law) { return std::make_shared<const Law>(std::move(law)); }
}  // namespace

ConstructionPlan::ConstructionPlan(std::vector<Law> laws, int n_min) {
    n_ = static_cast<int>(laws.size());
    std::vector<double> variances(n_);
    std::vector<double> steps;
    for (int i = 0; i < n_; ++i) {
        if (std::fabs(laws[i].mean()) > 1e-9 * laws[i].scale())
            throw std::invalid_argument("ConstructionPlan: law " + std::to_string(i + 1) +
                                        " is not centred");
        variances[i] = laws[i].variance();
        steps.push_back(laws[i].step());
    }
    tree_ = blocking::build_tree(variances, n_min);

    // One global lattice step: all discrete bookkeeping lives on it, so sums
    // of realized values keep exact integer indices.
    const double g = dist::common_step(steps);
    x_laws_.resize(n_);
    for (int i = 0; i < n_; ++i) x_laws_[i] = make_law(laws[i].rescaled_to_step(g));

    levels_.resize(tree_.depth + 1);
    for (int m = 0; m <= tree_.depth; ++m) {
        LevelPlan& lp = levels_[m];
        const blocking::Level& lev = tree_.levels[m];
        lp.m = m;
        lp.count = lev.count;

        // Component laws at this level: original laws on odd positions (all
        // positions at m = 0), variance-matched Gaussians on even positions.
        lp.comp_laws.resize(lev.count);
        lp.comp_vars.resize(lev.count);
        for (int i = 1; i <= lev.count; ++i) {
            const int orig = tree_.original_index(m, i);
            lp.comp_vars[i - 1] = variances[orig - 1];
            if (m == 0 || (i % 2) == 1) {
                lp.comp_laws[i - 1] = x_laws_[orig - 1];
            } else {
                lp.comp_laws[i - 1] = make_law(Law::from_atoms(
                    g, 0.0, {{0, 1.0}}, variances[orig - 1]));
            }
        }

        // Leaf-block laws via prefix convolutions (the prefixes also feed the
        // disaggregation conditionals), then the dyadic tree bottom-up.
        const int leaves = 1 << m;
        lp.node_laws.resize(2 * leaves - 1);
        lp.node_vars.resize(2 * leaves - 1);
        lp.peels.resize(leaves);
        for (int j = 1; j <= leaves; ++j) {
            const blocking::IndexRange r = tree_.block(m, m, j);
            std::vector<LawPtr> prefix(r.size());
            for (int i = r.first; i <= r.last; ++i) {
                const LawPtr& comp = lp.comp_laws[i - 1];
                prefix[i - r.first] =
                    (i == r.first) ? comp
                                   : make_law(dist::convolve(*prefix[i - r.first - 1], *comp));
            }
            lp.node_laws[heap_offset(m, j)] = prefix.back();
            lp.node_vars[heap_offset(m, j)] = tree_.block_variance(m, m, j);
            auto& peel = lp.peels[j - 1];
            peel.resize(r.size() > 1 ? r.size() - 1 : 0);
            for (int i = r.last; i >= r.first + 1; --i) {
                auto cond = std::make_unique<PairConditional>(
                    prefix[i - r.first - 1], lp.comp_laws[i - 1], 0.0, 1.0);
                max_pairs_ = std::max(max_pairs_, cond->pair_count());
                peel[i - r.first - 1] = std::move(cond);
            }
        }
        for (int k = m - 1; k >= 0; --k)
            for (int j = 1; j <= (1 << k); ++j) {
                const int node = heap_offset(k, j);
                const int left = heap_offset(k + 1, 2 * j - 1);
                const int right = heap_offset(k + 1, 2 * j);
                lp.node_laws[node] =
                    make_law(dist::convolve(*lp.node_laws[left], *lp.node_laws[right]));
                lp.node_vars[node] = tree_.block_variance(m, k, j);
            }

        lp.splits.resize(leaves - 1);
        for (int k = 0; k < m; ++k)
            for (int j = 1; j <= (1 << k); ++j) {
                const int node = heap_offset(k, j);
                const double bl = lp.node_vars[heap_offset(k + 1, 2 * j - 1)];
                const double br = lp.node_vars[heap_offset(k + 1, 2 * j)];
                Split& sp = lp.splits[node];
                sp.c1 = std::sqrt(br / bl);    // alpha of the right child
                sp.c2 = -std::sqrt(bl / br);   // minus alpha of the left child
                sp.v_sd = std::sqrt(sp.c1 * sp.c1 * bl + sp.c2 * sp.c2 * br);
                sp.cond = std::make_unique<PairConditional>(
                    lp.node_laws[heap_offset(k + 1, 2 * j - 1)],
                    lp.node_laws[heap_offset(k + 1, 2 * j)], sp.c1, sp.c2);
                max_pairs_ = std::max(max_pairs_, sp.cond->pair_count());
            }

        // The dyadic node laws must carry exactly the blocking variances.
        for (std::size_t node = 0; node < lp.node_laws.size(); ++node) {
            const double lv = lp.node_laws[node]->variance();
            if (std::fabs(lv - lp.node_vars[node]) > 1e-8 * std::max(1.0, lp.node_vars[node]))
                throw std::logic_error("ConstructionPlan: node law variance drifted");
        }
    }
}

namespace {

// The m-th step, writing into a reusable state: realized Gaussian sums up
// the dyadic tree, the top quantile transformation, one conditional split
// per internal node, then the disaggregation of every finest block against
// the orthogonalized eta contrasts.
void run_level(const ConstructionPlan& plan, int m, LevelState& st,
               PairConditional::Scratch& scratch) {
    const ConstructionPlan::LevelPlan& lp = plan.levels()[m];
    const int count = lp.count;
    const int leaves = 1 << m;
    st.m = m;

    st.w_node.resize(2 * leaves - 1);
    for (int j = 1; j <= leaves; ++j) {
        const blocking::IndexRange r = plan.tree().block(m, m, j);
        double acc = 0.0;
        for (int i = r.first; i <= r.last; ++i) acc += st.w_leaf[i - 1];
        st.w_node[ConstructionPlan::heap_offset(m, j)] = acc;
    }
    for (int k = m - 1; k >= 0; --k)
        for (int j = 1; j <= (1 << k); ++j)
            st.w_node[ConstructionPlan::heap_offset(k, j)] =
                st.w_node[ConstructionPlan::heap_offset(k + 1, 2 * j - 1)] +
                st.w_node[ConstructionPlan::heap_offset(k + 1, 2 * j)];

    st.y_node.resize(2 * leaves - 1);
    st.y_node[0] = quantile_transform(*lp.node_laws[0], st.w_node[0], lp.node_vars[0]);

    st.t_tilde.assign(leaves > 1 ? leaves - 1 : 0, 0.0);
    st.v_value.assign(leaves > 1 ? leaves - 1 : 0, 0.0);
    for (int k = 0; k < m; ++k)
        for (int j = 1; j <= (1 << k); ++j) {
            const int node = ConstructionPlan::heap_offset(k, j);
            const int left = ConstructionPlan::heap_offset(k + 1, 2 * j - 1);
            const int right = ConstructionPlan::heap_offset(k + 1, 2 * j);
            const ConstructionPlan::Split& sp = lp.splits[node];
            const double v = sp.c1 * st.w_node[left] + sp.c2 * st.w_node[right];
            auto res = sp.cond->invert(st.y_node[node], v / sp.v_sd, scratch);
            st.y_node[left] = res.y1;
            st.y_node[right] = res.y2;
            st.t_tilde[node] = res.form_value;
            st.v_value[node] = v;
        }

    st.y_leaf.resize(count);
    for (int j = 1; j <= leaves; ++j) {
        const blocking::IndexRange r = plan.tree().block(m, m, j);
        Realized sum = st.y_node[ConstructionPlan::heap_offset(m, j)];
        double var_partial = 0.0, eta_partial = 0.0;
        for (int i = r.first; i <= r.last; ++i) {
            var_partial += lp.comp_vars[i - 1];
            eta_partial += st.w_leaf[i - 1];
        }
        for (int i = r.last; i >= r.first + 1; --i) {
            const double vk = lp.comp_vars[i - 1];
            const double zeta = st.w_leaf[i - 1] - (vk / var_partial) * eta_partial;
            const double zeta_sd = std::sqrt(vk * (var_partial - vk) / var_partial);
            auto res = lp.peels[j - 1][i - r.first - 1]->invert(sum, zeta / zeta_sd,
                                                                scratch);
            st.y_leaf[i - 1] = res.y2;
            sum = res.y1;
            var_partial -= vk;
            eta_partial -= st.w_leaf[i - 1];
        }
        st.y_leaf[r.first - 1] = sum;
    }
}

}  // namespace

LevelState dyadic_level(const ConstructionPlan& plan, int m,
                        std::span<const double> w_leaf,
                        PairConditional::Scratch& scratch) {
    if (m < 0 || m > plan.depth())
        throw std::invalid_argument("dyadic_level: level out of range");
    const int count = plan.levels()[m].count;
    if (static_cast<int>(w_leaf.size()) != count)
        throw std::invalid_argument("dyadic_level: expected " + std::to_string(count) +
                                    " Gaussian inputs");
    LevelState st;
    st.w_leaf.assign(w_leaf.begin(), w_leaf.end());
    run_level(plan, m, st, scratch);
    return st;
}

CouplingOutput run_construction(const ConstructionPlan& plan,
                                std::span<const double> gaussians, bool retain_levels,
                                Workspace* workspace) {
    const int n = plan.n();
    if (static_cast<int>(gaussians.size()) != n)
        throw std::invalid_argument("run_construction: expected " + std::to_string(n) +
                                    " Gaussian draws");
    Workspace local;
    Workspace& ws = workspace ? *workspace : local;

    CouplingOutput out;
    out.x_tilde.assign(n, 0.0);
    out.n_values.assign(gaussians.begin(), gaussians.end());
    int assigned = 0;

    const int depth = plan.depth();
    ws.prev_y.clear();
    for (int m = depth; m >= 0; --m) {
        const int count = plan.levels()[m].count;

        // Gaussian inputs of this level: W^m_i = Y~^{m+1}_{2i} (fresh N_i at
        // the top level).
        LevelState& st = ws.state;
        st.w_leaf.resize(count);
        if (m == depth) {
            for (int i = 1; i <= count; ++i) st.w_leaf[i - 1] = gaussians[i - 1];
        } else {
            for (int i = 1; i <= count; ++i) st.w_leaf[i - 1] = ws.prev_y[2 * i - 1].value;
        }
        run_level(plan, m, st, ws.scratch);

        // Harvest finished indices; even positions feed the next level.
        for (int i = 1; i <= count; ++i) {
            if (m == 0 || (i % 2) == 1) {
                const int orig = plan.tree().original_index(m, i);
                out.x_tilde[orig - 1] = st.y_leaf[i - 1].value;
                ++assigned;
            }
        }
        if (retain_levels) out.levels.push_back(st);
        std::swap(ws.prev_y, st.y_leaf);
    }

    if (assigned != n)
        throw std::logic_error("run_construction: " + std::to_string(assigned) + " of " +
                               std::to_string(n) + " indices assigned");
    return out;
}

LevelDiagnostics level_diagnostics(const LevelState& state) {
    LevelDiagnostics d;
    d.m = state.m;
    d.s0 = state.y_node[0].value - state.w_node[0];
    const std::size_t internal = state.t_tilde.size();
    d.s_kj.resize(internal);
    d.t_star.resize(internal);
    d.v_star.resize(internal);
    for (int k = 0;
         static_cast<std::size_t>(ConstructionPlan::heap_offset(k, 1)) < internal; ++k) {
        for (int j = 1; j <= (1 << k); ++j) {
            const int node = ConstructionPlan::heap_offset(k, j);
            const int left = ConstructionPlan::heap_offset(k + 1, 2 * j - 1);
            const int right = ConstructionPlan::heap_offset(k + 1, 2 * j);
            d.s_kj[node] = state.t_tilde[node] - state.v_value[node];
            d.t_star[node] = state.y_node[left].value - state.y_node[right].value;
            d.v_star[node] = state.w_node[left] - state.w_node[right];
        }
    }
    return d;
}

}  // namespace kmt::coupling
