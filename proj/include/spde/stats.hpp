#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace spde {

double normal_cdf(double x, double variance = 1.0);
double normal_quantile(double p, double variance = 1.0);
double normal_pdf(double x, double variance = 1.0);

/// Two-sided Kolmogorov-Smirnov distance between the empirical distribution
/// of `samples` and `cdf`.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Asymptotic critical value c(alpha) / sqrt(n) for alpha in {0.10, 0.05, 0.01}.
double ks_critical_value(double alpha, std::size_t n);

double sample_mean(std::span<const double> x);
/// Unbiased (n - 1) variance.
double sample_variance(std::span<const double> x);

struct XY {
    double x;
    double y;
};

/// Sorted samples paired with i / n.
std::vector<XY> ecdf_table(std::span<const double> samples);

/// (theoretical quantile at (i - 1/2) / n of N(0, variance), sorted sample).
std::vector<XY> qq_table(std::span<const double> samples, double variance);

struct HistogramBin {
    double left;
    double right;
    std::size_t count;
    double density;
    double normal_density;  ///< limit density at the bin centre
};

/// ceil(sqrt(n)) equal-width bins over [min, max].
std::vector<HistogramBin> histogram(std::span<const double> samples, double variance);

}  // namespace spde
