#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "spde/spectral.hpp"

namespace spde {

/// Covariance eigenvalues q_j of the trace-class Q together with the
/// injection of noise mode j into the state basis (identity by default).
class NoiseSpec {
public:
    explicit NoiseSpec(std::vector<double> q);
    NoiseSpec(std::vector<double> q, std::vector<int> mode_map);

    /// q_j = 1 / lambda_j on the retained modes, i.e. Q = A^{-1}.
    static NoiseSpec inverse_spectrum(const OperatorSpec& op);
    static NoiseSpec uniform(int modes, double q);

    int modes() const { return static_cast<int>(q_.size()); }
    const std::vector<double>& q() const { return q_; }
    double q(int j) const { return q_[static_cast<std::size_t>(j)]; }
    int mode_index(int j) const { return mode_map_[static_cast<std::size_t>(j)]; }
    const std::vector<int>& mode_map() const { return mode_map_; }

private:
    std::vector<double> q_;
    std::vector<int> mode_map_;
};

/// Per-mode (dW_j, dZ_j) over one step:
/// dW_j the Wiener increment with Var q_j dt, dZ_j the time-integrated
/// increment with Var q_j dt^3/3 and Cov(dW_j, dZ_j) = q_j dt^2/2.
struct IncrementPair {
    std::vector<double> dw;
    std::vector<double> dz;

    int modes() const { return static_cast<int>(dw.size()); }
};

struct PathSeed {
    std::uint64_t master = 0;
    std::uint64_t path = 0;
};

using Rng = std::mt19937_64;

/// Deterministic per-path generator from (master seed, path index).
Rng make_rng(PathSeed seed);

/// The exact joint-law construction from two standard normals per mode:
/// dW_j = sqrt(q_j dt) xi_j, dZ_j = sqrt(q_j) dt^{3/2} (xi_j/2 + eta_j/(2 sqrt 3)).
IncrementPair pair_from_normals(const NoiseSpec& noise, double dt,
                                std::span<const double> xi, std::span<const double> eta);

/// Draws one increment pair; variates consumed mode-minor, xi before eta.
IncrementPair sample_pair(const NoiseSpec& noise, double dt, Rng& rng);

/// Exact pathwise coarsening of equal-length sub-step pairs:
/// dW = sum_m dW_m, dZ = sum_m ( dZ_m + (k-1-m) delta dW_m ).
IncrementPair aggregate_pairs(std::span<const IncrementPair> pairs, double delta);

/// Groups a fine stream into coarse steps of `factor` fine steps each.
std::vector<IncrementPair> aggregate_stream(std::span<const IncrementPair> fine,
                                            int factor, double delta);

/// Fine-resolution increment stream for one path. Variates are drawn in
/// (step-major, mode-minor, xi then eta) order at this resolution; coarser
/// resolutions must aggregate from it so that all resolutions share one
/// Brownian path.
class PathStream {
public:
    PathStream(PathSeed seed, const NoiseSpec& noise, double dt_fine);

    IncrementPair next();
    std::vector<IncrementPair> generate(int steps);

    double dt() const { return dt_; }

private:
    const NoiseSpec* noise_;
    double dt_;
    Rng rng_;
    std::normal_distribution<double> gauss_;
    std::vector<double> xi_, eta_;
};

/// Left-point Ito-Riemann sums of the single, double and triple iterated
/// integrals of the standard scalar Brownian components over one step,
/// built from a fine sub-division of the step. Test-only oracle.
/// Components are in the orthonormal U_0 scale, i.e. the sub-increments
/// used are dW_j / sqrt(q_j).
struct IteratedIntegrals {
    int modes = 0;
    std::vector<double> single;        // I_{(i)}, length J
    std::vector<double> time_integral; // left-point sum for int (beta_s - beta_t0) ds
    std::vector<double> dbl;           // I_{(i,j)}, row-major J x J
    std::vector<double> triple;        // I_{(i,j,k)}, index (i*J+j)*J+k

    double dbl_at(int i, int j) const { return dbl[static_cast<std::size_t>(i * modes + j)]; }
    double triple_at(int i, int j, int k) const {
        return triple[static_cast<std::size_t>((i * modes + j) * modes + k)];
    }
};

IteratedIntegrals iterated_integrals_oracle(const NoiseSpec& noise, double dt,
                                            std::span<const IncrementPair> sub_steps);

} // namespace spde
