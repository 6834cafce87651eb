#include "spde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "spde/errors.hpp"

namespace spde {

double normal_cdf(double x, double variance) {
    if (variance <= 0.0) {
        return x < 0.0 ? 0.0 : 1.0;
    }
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

double normal_quantile(double p, double variance) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ValidationError("normal_quantile: p must be in (0, 1)");
    }
    if (variance <= 0.0) {
        return 0.0;
    }
    return boost::math::quantile(boost::math::normal(0.0, std::sqrt(variance)), p);
}

double normal_pdf(double x, double variance) {
    if (variance <= 0.0) {
        return 0.0;
    }
    return std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) {
        throw ValidationError("ks_statistic: no samples");
    }
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(static_cast<double>(i) / n - f)});
    }
    return d;
}

double ks_critical_value(double alpha, std::size_t n) {
    double c;
    if (std::abs(alpha - 0.10) < 1e-9) {
        c = 1.22;
    } else if (std::abs(alpha - 0.05) < 1e-9) {
        c = 1.36;
    } else if (std::abs(alpha - 0.01) < 1e-9) {
        c = 1.63;
    } else {
        throw ValidationError("ks_critical_value: alpha must be 0.10, 0.05 or 0.01");
    }
    return c / std::sqrt(static_cast<double>(n));
}

double sample_mean(std::span<const double> x) {
    if (x.empty()) {
        throw ValidationError("sample_mean: no samples");
    }
    double s = 0.0;
    for (double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) {
        throw ValidationError("sample_variance: needs at least 2 samples");
    }
    const double m = sample_mean(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return s / static_cast<double>(x.size() - 1);
}

std::vector<XY> ecdf_table(std::span<const double> samples) {
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    std::vector<XY> out;
    out.reserve(s.size());
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.push_back({s[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

std::vector<XY> qq_table(std::span<const double> samples, double variance) {
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    std::vector<XY> out;
    out.reserve(s.size());
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.push_back({normal_quantile((static_cast<double>(i) + 0.5) / n, variance), s[i]});
    }
    return out;
}

std::vector<HistogramBin> histogram(std::span<const double> samples, double variance) {
    if (samples.empty()) {
        return {};
    }
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const auto bins = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(samples.size()))));
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<HistogramBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].left = lo + width * static_cast<double>(b);
        out[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
        out[b].count = 0;
    }
    for (double v : samples) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        out[std::min(b, bins - 1)].count++;
    }
    const double n = static_cast<double>(samples.size());
    for (auto& bin : out) {
        bin.density = static_cast<double>(bin.count) / (n * width);
        bin.normal_density = normal_pdf(0.5 * (bin.left + bin.right), variance);
    }
    return out;
}

}  // namespace spde
