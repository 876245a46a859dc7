#include "kmt/math/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kmt/math/rng.hpp"
#include "kmt/math/special.hpp"

namespace kmt::math {

GofResult chi_square_gof(std::span<const std::int64_t> counts,
                         std::span<const double> probs, double min_expected) {
    if (counts.size() != probs.size() || counts.empty())
        throw std::invalid_argument("chi_square_gof: size mismatch");
    const double n = static_cast<double>(
        std::accumulate(counts.begin(), counts.end(), std::int64_t{0}));
    // Merge low-expectation cells left to right.
    std::vector<double> obs, exp;
    double acc_o = 0.0, acc_e = 0.0;
    int merged = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        acc_o += static_cast<double>(counts[i]);
        acc_e += n * probs[i];
        if (acc_e >= min_expected) {
            obs.push_back(acc_o);
            exp.push_back(acc_e);
            acc_o = acc_e = 0.0;
        } else {
            ++merged;
        }
    }
    if (acc_e > 0.0 || acc_o > 0.0) {
        if (exp.empty()) {
            obs.push_back(acc_o);
            exp.push_back(acc_e);
        } else {
            obs.back() += acc_o;
            exp.back() += acc_e;
        }
    }
    GofResult r;
    r.merged_cells = merged;
    if (obs.size() < 2) {
        r.dof = 0.0;
        r.p_value = 1.0;
        return r;
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double d = obs[i] - exp[i];
        r.statistic += d * d / exp[i];
    }
    r.dof = static_cast<double>(obs.size() - 1);
    r.p_value = chi_square_sf(r.statistic, r.dof);
    return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        d = std::max(d, std::fabs(ia / na - ib / nb));
    }
    KsResult r;
    r.statistic = d;
    const double ne = std::sqrt(na * nb / (na + nb));
    r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    const double cxy = sxy - sx * sy / n;
    LineFit f;
    if (vx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    f.slope = cxy / vx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r_squared = (vy > 0.0) ? (cxy * cxy) / (vx * vy) : 1.0;
    return f;
}

double sample_mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("sample_mean: empty");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need n >= 2");
    const double m = sample_mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

double sample_median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("sample_median: empty");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

double correlation_from_sums(double sx, double sy, double sxx, double syy,
                             double sxy, std::int64_t n) {
    const double dn = static_cast<double>(n);
    const double vx = sxx - sx * sx / dn;
    const double vy = syy - sy * sy / dn;
    const double cxy = sxy - sx * sy / dn;
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return cxy / std::sqrt(vx * vy);
}

double bootstrap_mean_percentile(std::span<const double> v, int resamples,
                                 double percentile, std::uint64_t seed) {
    if (v.empty() || resamples < 1)
        throw std::invalid_argument("bootstrap_mean_percentile: bad arguments");
    std::mt19937_64 eng(seed);
    const std::size_t n = v.size();
    std::vector<double> means(resamples);
    for (int b = 0; b < resamples; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // Lemire-style bounded draw; bias is negligible for n << 2^64.
            acc += v[eng() % n];
        }
        means[b] = acc / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    double pos = percentile * (resamples - 1);
    std::size_t i0 = static_cast<std::size_t>(pos);
    std::size_t i1 = std::min<std::size_t>(i0 + 1, resamples - 1);
    double w = pos - static_cast<double>(i0);
    return means[i0] * (1.0 - w) + means[i1] * w;
}

}  // namespace kmt::math
