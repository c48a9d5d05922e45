#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "spde/stochastics.hpp"

using namespace spde;

TEST_CASE("NoiseSpec validates covariance eigenvalues") {
    CHECK_THROWS_AS(NoiseSpec(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSpec({1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSpec({-0.5}), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSpec({1.0}, {0, 1}), std::invalid_argument);

    const OperatorSpec op = OperatorSpec::dirichlet_laplacian(4);
    const NoiseSpec inv = NoiseSpec::inverse_spectrum(op);
    REQUIRE(inv.modes() == 4);
    for (int j = 0; j < 4; ++j)
        CHECK(inv.q(j) == doctest::Approx(1.0 / op.eigenvalue(j)).epsilon(1e-15));

    const NoiseSpec uni = NoiseSpec::uniform(3, 0.25);
    CHECK(uni.modes() == 3);
    CHECK(uni.q(2) == 0.25);
    CHECK(uni.mode_index(2) == 2);
}

TEST_CASE("pair_from_normals realizes the stated deterministic construction") {
    const NoiseSpec noise({1.0});
    const double dt = 0.3;
    const std::vector<double> xi = {1.0}, eta = {1.0};
    const IncrementPair p = pair_from_normals(noise, dt, xi, eta);
    CHECK(p.dw[0] == doctest::Approx(std::sqrt(dt)).epsilon(1e-15));
    const double dz_expect = std::pow(dt, 1.5) * (0.5 + 0.5 / std::sqrt(3.0));
    CHECK(p.dz[0] == doctest::Approx(dz_expect).epsilon(1e-15));

    const NoiseSpec noise2({4.0});
    const IncrementPair p2 = pair_from_normals(noise2, dt, xi, eta);
    CHECK(p2.dw[0] == doctest::Approx(2.0 * std::sqrt(dt)).epsilon(1e-15));
    CHECK(p2.dz[0] == doctest::Approx(2.0 * dz_expect).epsilon(1e-15));

    CHECK_THROWS_AS(pair_from_normals(noise, 0.0, xi, eta), std::domain_error);
    CHECK_THROWS_AS(pair_from_normals(noise, dt, std::vector<double>{1.0, 2.0}, eta),
                    std::invalid_argument);
}

TEST_CASE("sample_pair second moments match the joint law") {
    const NoiseSpec noise({0.8, 0.2});
    const double dt = 0.25;
    Rng rng = make_rng({11, 0});
    const int n = 40000;
    std::vector<double> sww(2, 0.0), swz(2, 0.0), szz(2, 0.0);
    for (int s = 0; s < n; ++s) {
        const IncrementPair p = sample_pair(noise, dt, rng);
        for (int j = 0; j < 2; ++j) {
            sww[j] += p.dw[j] * p.dw[j];
            swz[j] += p.dw[j] * p.dz[j];
            szz[j] += p.dz[j] * p.dz[j];
        }
    }
    for (int j = 0; j < 2; ++j) {
        const double q = noise.q(j);
        // relative tolerances sized ~5 standard errors of the moment estimates
        CHECK(sww[j] / n == doctest::Approx(q * dt).epsilon(0.04));
        CHECK(swz[j] / n == doctest::Approx(q * dt * dt / 2.0).epsilon(0.05));
        CHECK(szz[j] / n == doctest::Approx(q * dt * dt * dt / 3.0).epsilon(0.04));
    }
}

TEST_CASE("make_rng is deterministic in (master, path) and distinct across paths") {
    Rng a = make_rng({42, 7});
    Rng b = make_rng({42, 7});
    Rng c = make_rng({42, 8});
    Rng d = make_rng({43, 7});
    CHECK(a() == b());
    CHECK(a() == b());
    Rng a2 = make_rng({42, 7});
    CHECK(a2() != c());
    CHECK(make_rng({42, 7})() != d());
}

TEST_CASE("aggregate_pairs matches an independent prefix-sum oracle") {
    const NoiseSpec noise({1.0, 0.5, 0.1});
    const double delta = 0.01;
    Rng rng = make_rng({3, 5});
    const int k = 7;
    std::vector<IncrementPair> sub;
    for (int m = 0; m < k; ++m) sub.push_back(sample_pair(noise, delta, rng));

    const IncrementPair agg = aggregate_pairs(sub, delta);
    for (int j = 0; j < 3; ++j) {
        // dW over the union is the plain sum
        double w = 0.0;
        for (const auto& p : sub) w += p.dw[j];
        CHECK(agg.dw[j] == doctest::Approx(w).epsilon(1e-14));

        // dZ oracle: int over sub-interval m of (beta_s - beta_0) ds
        //          = dz_m + delta * (prefix W up to m)
        double z = 0.0, prefix = 0.0;
        for (const auto& p : sub) {
            z += p.dz[j] + delta * prefix;
            prefix += p.dw[j];
        }
        CHECK(agg.dz[j] == doctest::Approx(z).epsilon(1e-13));
    }
    CHECK_THROWS_AS(aggregate_pairs(std::vector<IncrementPair>{}, delta), std::domain_error);
}

TEST_CASE("aggregate_stream groups and refuses non-dividing factors") {
    const NoiseSpec noise({1.0});
    const double delta = 0.5;
    Rng rng = make_rng({1, 1});
    std::vector<IncrementPair> fine;
    for (int m = 0; m < 6; ++m) fine.push_back(sample_pair(noise, delta, rng));

    const std::vector<IncrementPair> coarse = aggregate_stream(fine, 3, delta);
    REQUIRE(coarse.size() == 2);
    const IncrementPair first = aggregate_pairs(std::vector<IncrementPair>(fine.begin(), fine.begin() + 3), delta);
    CHECK(coarse[0].dw[0] == doctest::Approx(first.dw[0]).epsilon(1e-15));
    CHECK(coarse[0].dz[0] == doctest::Approx(first.dz[0]).epsilon(1e-15));

    CHECK_THROWS_AS(aggregate_stream(fine, 4, delta), std::invalid_argument);
}

TEST_CASE("aggregation is associative: two-stage equals one-stage") {
    const NoiseSpec noise({0.7, 0.3});
    const double delta = 1.0 / 64.0;
    PathStream stream({99, 0}, noise, delta);
    const std::vector<IncrementPair> fine = stream.generate(64);

    const std::vector<IncrementPair> mid = aggregate_stream(fine, 4, delta);
    const std::vector<IncrementPair> two_stage = aggregate_stream(mid, 4, 4.0 * delta);
    const std::vector<IncrementPair> one_stage = aggregate_stream(fine, 16, delta);
    REQUIRE(two_stage.size() == one_stage.size());
    for (std::size_t m = 0; m < one_stage.size(); ++m)
        for (int j = 0; j < 2; ++j) {
            CHECK(two_stage[m].dw[j] == doctest::Approx(one_stage[m].dw[j]).epsilon(1e-13));
            CHECK(two_stage[m].dz[j] == doctest::Approx(one_stage[m].dz[j]).epsilon(1e-12));
        }
}

TEST_CASE("PathStream replays deterministically and matches sample_pair order") {
    const NoiseSpec noise({1.0, 0.5});
    PathStream s1({5, 3}, noise, 0.125);
    PathStream s2({5, 3}, noise, 0.125);
    const auto a = s1.generate(10);
    const auto b = s2.generate(10);
    for (int m = 0; m < 10; ++m)
        for (int j = 0; j < 2; ++j) {
            CHECK(a[m].dw[j] == b[m].dw[j]);
            CHECK(a[m].dz[j] == b[m].dz[j]);
        }

    PathStream other({5, 4}, noise, 0.125);
    const auto c = other.generate(1);
    CHECK(a[0].dw[0] != c[0].dw[0]);
}

TEST_CASE("iterated integral oracle satisfies the discrete Ito identities") {
    const NoiseSpec noise({1.0, 0.4});
    const double dt = 0.5;
    const int n = 64;
    PathStream stream({17, 2}, noise, dt / n);
    const std::vector<IncrementPair> sub = stream.generate(n);
    const IteratedIntegrals it = iterated_integrals_oracle(noise, dt, sub);
    REQUIRE(it.modes == 2);

    // singles are the unit-scale Brownian increments
    for (int j = 0; j < 2; ++j) {
        double s = 0.0;
        for (const auto& p : sub) s += p.dw[j] / std::sqrt(noise.q(j));
        CHECK(it.single[j] == doctest::Approx(s).epsilon(1e-13));
    }

    // left-point identity: I_(i,j) + I_(j,i) = I_i I_j - sum_m db_i db_j (exact)
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double cross = 0.0;
            for (const auto& p : sub)
                cross += (p.dw[i] / std::sqrt(noise.q(i))) * (p.dw[j] / std::sqrt(noise.q(j)));
            const double lhs = it.dbl_at(i, j) + it.dbl_at(j, i);
            const double rhs = it.single[i] * it.single[j] - cross;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }

    CHECK_THROWS_AS(iterated_integrals_oracle(noise, dt, std::vector<IncrementPair>{}),
                    std::domain_error);
}

TEST_CASE("oracle double integral converges to the commutative closed form") {
    // Symmetrized L2(Omega) distance to (I_i I_j - delta_ij dt)/2 shrinks
    // as the sub-division is refined along the *same* path.
    const NoiseSpec noise({1.0});
    const double dt = 1.0;
    const int paths = 200;
    double err_coarse = 0.0, err_fine = 0.0;
    for (int p = 0; p < paths; ++p) {
        PathStream stream({123, static_cast<std::uint64_t>(p)}, noise, dt / 256);
        const std::vector<IncrementPair> fine = stream.generate(256);
        const IncrementPair total = aggregate_pairs(fine, dt / 256);
        const double I = total.dw[0] / std::sqrt(noise.q(0));
        const double closed = 0.5 * (I * I - dt);
        const std::vector<IncrementPair> coarse = aggregate_stream(fine, 16, dt / 256);
        const double a = iterated_integrals_oracle(noise, dt, coarse).dbl_at(0, 0);
        const double b = iterated_integrals_oracle(noise, dt, fine).dbl_at(0, 0);
        err_coarse += (a - closed) * (a - closed);
        err_fine += (b - closed) * (b - closed);
    }
    CHECK(err_fine < err_coarse);
    // E (I_(1,1)(n) - closed)^2 = dt^2 / (2n); check the coarse level's scale
    CHECK(err_coarse / paths == doctest::Approx(dt * dt / 32.0).epsilon(0.35));
}
