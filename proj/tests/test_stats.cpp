#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "spde/stats.hpp"

using namespace spde;

TEST_CASE("pairwise_sum matches naive summation on benign data") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(1.0 / i);
    double naive = 0.0;
    for (double x : v) naive += x;
    CHECK(pairwise_sum(v) == doctest::Approx(naive).epsilon(1e-14));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
    CHECK(pairwise_sum(std::vector<double>{3.5}) == 3.5);
}

TEST_CASE("pairwise_sum is deterministic in input order") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> v(10001);
    for (double& x : v) x = g(rng) * 1e8;
    const double a = pairwise_sum(v);
    const double b = pairwise_sum(v);
    CHECK(a == b);
}

TEST_CASE("fit_order recovers an exact power law") {
    std::vector<std::pair<int, double>> pts;
    for (int m : {4, 8, 16, 32}) pts.emplace_back(m, 4.0 * std::pow(double(m), -1.5));
    const OrderFit fit = fit_order(pts);
    CHECK(fit.slope == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fit.points == 4);
    // a perfect fit has a degenerate (zero-width) confidence interval
    CHECK(fit.ci_hi - fit.ci_lo < 1e-9);
}

TEST_CASE("fit_order on equal rms values gives slope zero") {
    std::vector<std::pair<int, double>> pts{{4, 0.5}, {8, 0.5}, {16, 0.5}};
    CHECK(fit_order(pts).slope == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit_order input validation") {
    std::vector<std::pair<int, double>> two{{4, 1.0}, {8, 0.5}};
    CHECK_THROWS_AS(fit_order(two), std::domain_error);
    std::vector<std::pair<int, double>> nonpos{{4, 1.0}, {8, 0.0}, {16, 0.1}};
    CHECK_THROWS_AS(fit_order(nonpos), std::domain_error);
}

TEST_CASE("fit_order under 5% multiplicative noise stays near the true order") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;
    int inside = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        std::vector<std::pair<int, double>> pts;
        for (int m : {4, 8, 16, 32, 64})
            pts.emplace_back(m, 2.0 * std::pow(double(m), -1.5) * (1.0 + 0.05 * g(rng)));
        const OrderFit fit = fit_order(pts);
        if (fit.slope >= 1.35 && fit.slope <= 1.65) ++inside;
        CHECK(fit.ci_lo <= fit.slope);
        CHECK(fit.ci_hi >= fit.slope);
    }
    CHECK(inside > trials * 9 / 10); // "typically" within the band
}

TEST_CASE("spearman rank correlation endpoints") {
    CHECK(spearman_rho(std::vector<double>{1, 2, 3, 4, 5}) == doctest::Approx(1.0));
    CHECK(spearman_rho(std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(std::abs(spearman_rho(std::vector<double>{2, 1, 4, 3, 2.5})) < 1.0);
}

TEST_CASE("spearman trend test flags growth and passes noise") {
    CHECK(spearman_increasing_trend(std::vector<double>{1, 2, 3, 4, 5, 6, 7}));
    CHECK_FALSE(spearman_increasing_trend(std::vector<double>{7, 6, 5, 4, 3, 2, 1}));
    CHECK_FALSE(spearman_increasing_trend(std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0}));
    // a single mild inversion in a short series is not significant at 5%
    CHECK_FALSE(spearman_increasing_trend(std::vector<double>{3, 1, 2, 1.5}));

    // false-positive rate on i.i.d. noise stays near the nominal level
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    int hits = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> y(7);
        for (double& x : y) x = g(rng);
        if (spearman_increasing_trend(y)) ++hits;
    }
    CHECK(hits < trials / 10); // well under 10% for a 5% one-sided test
}
