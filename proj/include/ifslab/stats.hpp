#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ifslab/rng.hpp"

namespace ifslab {

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double stderr_of_mean(std::span<const double> v) {
    return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return lo <= x && x <= hi; }
    double half_width() const { return 0.5 * (hi - lo); }
};

// Percentile-bootstrap 95% CI of the mean; seeded for reproducibility.
inline Interval bootstrap_ci_mean(std::span<const double> v, RandomStream& rng,
                                  int resamples = 2000) {
    const std::size_t n = v.size();
    if (n == 0) throw std::invalid_argument("bootstrap on empty sample");
    std::vector<double> means(resamples);
    for (int r = 0; r < resamples; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += v[static_cast<std::size_t>(rng.uniform() * n)];
        means[r] = s / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    return {means[static_cast<std::size_t>(0.025 * resamples)],
            means[static_cast<std::size_t>(0.975 * resamples) - 1]};
}

// P(K > x) for the Kolmogorov distribution (asymptotic KS tail).
inline double kolmogorov_tail(double x) {
    if (x <= 0.0) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

// One-sample KS statistic against a CDF; returns (statistic, p-value).
template <typename Cdf>
std::pair<double, double> ks_test(std::vector<double> sample, Cdf&& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return {d, kolmogorov_tail(std::sqrt(n) * d)};
}

// Two-sample KS; returns (statistic, p-value).
inline std::pair<double, double> ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_tail(ne * d)};
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || n != y.size()) throw std::invalid_argument("least_squares: bad input");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    const double vx = sxx - sx * sx / dn;
    const double vy = syy - sy * sy / dn;
    const double cov = sxy - sx * sy / dn;
    LineFit fit;
    fit.slope = cov / vx;
    fit.intercept = (sy - fit.slope * sx) / dn;
    fit.r_squared = (vy > 0.0) ? cov * cov / (vx * vy) : 1.0;
    return fit;
}

}  // namespace ifslab
