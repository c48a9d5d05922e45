#pragma once

#include <span>
#include <utility>
#include <vector>

namespace spde {

/// Pairwise (cascade) summation in the given order; reproducible to the
/// last few ulps across platforms.
double pairwise_sum(std::span<const double> values);

struct OrderFit {
    double slope = 0.0; // reported as a positive order
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    int points = 0;
};

/// OLS of log2(rms) against log2(M); the negated slope is the empirical
/// strong order. Requires >= 3 points and positive rms values.
OrderFit fit_order(std::span<const std::pair<int, double>> resolution_rms);

/// Spearman rank correlation of y against the (already sorted, strictly
/// increasing) x ranks.
double spearman_rho(std::span<const double> y);

/// One-sided 5% test for a positive monotone trend.
bool spearman_increasing_trend(std::span<const double> y);

} // namespace spde
