#ifndef KMT_MATH_STATS_HPP
#define KMT_MATH_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace kmt::math {

struct GofResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    int merged_cells = 0;
};

/// Pearson chi-square goodness of fit of observed counts against cell
/// probabilities.  Cells whose expected count falls below min_expected are
/// merged with a neighbour before the statistic is formed.
GofResult chi_square_gof(std::span<const std::int64_t> counts,
                         std::span<const double> probs,
                         double min_expected = 5.0);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

double sample_mean(std::span<const double> v);
double sample_variance(std::span<const double> v);  // unbiased
double sample_median(std::vector<double> v);

/// Pearson correlation from accumulated sums over n observations.
double correlation_from_sums(double sx, double sy, double sxx, double syy,
                             double sxy, std::int64_t n);

/// Percentile of the bootstrap distribution of the sample mean of v
/// (resamples of the same size, `resamples` of them, percentile in (0,1)).
double bootstrap_mean_percentile(std::span<const double> v, int resamples,
                                 double percentile, std::uint64_t seed);

}  // namespace kmt::math

#endif
