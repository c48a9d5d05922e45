#include "spde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spde {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

namespace {

// two-sided 95% t quantiles, dof 1..10
constexpr double t95[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};

double t_quantile_95(int dof) {
    if (dof < 1) return 0.0;
    if (dof <= 10) return t95[dof - 1];
    return 1.96 + 2.4 / double(dof); // crude tail correction, fine for dof > 10
}

} // namespace

OrderFit fit_order(std::span<const std::pair<int, double>> resolution_rms) {
    const int n = static_cast<int>(resolution_rms.size());
    if (n < 3)
        throw std::domain_error("fit_order: needs at least 3 resolutions");
    std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& [m, rms] = resolution_rms[static_cast<std::size_t>(i)];
        if (!(rms > 0.0))
            throw std::domain_error("fit_order: rms values must be positive");
        x[static_cast<std::size_t>(i)] = std::log2(double(m));
        y[static_cast<std::size_t>(i)] = std::log2(rms);
    }
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) { mx += x[static_cast<std::size_t>(i)]; my += y[static_cast<std::size_t>(i)]; }
    mx /= n; my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[static_cast<std::size_t>(i)] - mx;
        sxx += dx * dx;
        sxy += dx * (y[static_cast<std::size_t>(i)] - my);
    }
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[static_cast<std::size_t>(i)] - my - slope * (x[static_cast<std::size_t>(i)] - mx);
        ss_res += r * r;
    }
    OrderFit fit;
    fit.points = n;
    fit.slope = -slope;
    const int dof = n - 2;
    const double se = dof > 0 ? std::sqrt(ss_res / double(dof) / sxx) : 0.0;
    const double half_width = t_quantile_95(dof) * se;
    fit.ci_lo = fit.slope - half_width;
    fit.ci_hi = fit.slope + half_width;
    return fit;
}

double spearman_rho(std::span<const double> y) {
    const int n = static_cast<int>(y.size());
    if (n < 2) return 0.0;
    // ranks of y (average ranks for ties)
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return y[static_cast<std::size_t>(a)] < y[static_cast<std::size_t>(b)];
    });
    std::vector<double> rank(static_cast<std::size_t>(n));
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && y[static_cast<std::size_t>(idx[static_cast<std::size_t>(j + 1)])] ==
                                y[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])])
            ++j;
        const double r = 0.5 * double(i + j) + 1.0;
        for (int k = i; k <= j; ++k) rank[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = r;
        i = j + 1;
    }
    // x ranks are 1..n in order
    double mx = 0.5 * double(n + 1);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int k = 0; k < n; ++k) {
        const double dx = double(k + 1) - mx;
        const double dy = rank[static_cast<std::size_t>(k)] - mx;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

bool spearman_increasing_trend(std::span<const double> y) {
    const int n = static_cast<int>(y.size());
    const double rho = spearman_rho(y);
    if (n < 4) return false;
    // one-sided 5% critical values for small n
    static constexpr double crit[] = {1.0, 0.9, 0.829, 0.714, 0.643, 0.600, 0.564}; // n = 4..10
    if (n <= 10) return rho >= crit[n - 4];
    const double t = rho * std::sqrt(double(n - 2) / (1.0 - rho * rho));
    return t >= 1.645 + 1.2 / double(n - 2);
}

} // namespace spde
