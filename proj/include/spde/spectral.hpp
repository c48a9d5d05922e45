#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spde {

/// Diagonal negative generator -A on the retained eigenmodes.
/// Stores the eigenvalue sequence lambda_1 <= ... <= lambda_N, all > 0.
class OperatorSpec {
public:
    explicit OperatorSpec(std::vector<double> eigenvalues);

    /// lambda_i = pi^2 i^2, the Dirichlet Laplacian spectrum on (0,1).
    static OperatorSpec dirichlet_laplacian(int n_modes);

    int dimension() const { return static_cast<int>(eigenvalues_.size()); }
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    double eigenvalue(int i) const { return eigenvalues_[static_cast<std::size_t>(i)]; }

private:
    std::vector<double> eigenvalues_;
};

/// Coefficients of an H-valued state in the eigenbasis of A.
/// Construction rejects non-finite entries.
class SpectralVector {
public:
    SpectralVector() = default;
    explicit SpectralVector(std::vector<double> coeffs);

    static SpectralVector zero(int n) { return SpectralVector(std::vector<double>(static_cast<std::size_t>(n), 0.0), unchecked_tag{}); }
    /// Internal fast path: skips the finiteness check. Callers own the guarantee.
    static SpectralVector unchecked(std::vector<double> coeffs) { return SpectralVector(std::move(coeffs), unchecked_tag{}); }

    int dimension() const { return static_cast<int>(coeffs_.size()); }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double operator[](int i) const { return coeffs_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return coeffs_[static_cast<std::size_t>(i)]; }

    bool finite() const;

private:
    struct unchecked_tag {};
    SpectralVector(std::vector<double> coeffs, unchecked_tag) : coeffs_(std::move(coeffs)) {}
    std::vector<double> coeffs_;
};

/// result[i] = exp(-lambda_i t) v[i]. Throws std::domain_error for t < 0.
SpectralVector semigroup_apply(const OperatorSpec& op, double t, const SpectralVector& v);

/// result[i] = lambda_i^r v[i], any real r (finite-dimensional truncation).
SpectralVector fractional_apply(const OperatorSpec& op, double r, const SpectralVector& v);

/// result[i] = -lambda_i v[i], the action of A itself.
SpectralVector generator_apply(const OperatorSpec& op, const SpectralVector& v);

/// Plain l2 norm, i.e. the H = H_0 norm.
double norm_h(const SpectralVector& v);

/// ||v||_{H_r} = sqrt( sum_i lambda_i^{2r} v_i^2 ).
double norm_hr(const OperatorSpec& op, double r, const SpectralVector& v);

/// Precomputed per-mode semigroup factors exp(-lambda_i t) for a fixed t,
/// for reuse inside stepping loops.
class SemigroupFactors {
public:
    SemigroupFactors(const OperatorSpec& op, double t);
    void apply_in_place(std::vector<double>& coeffs) const;
    SpectralVector apply(const SpectralVector& v) const;

private:
    std::vector<double> factors_;
};

/// Sine-basis collocation grid on (0,1) with G >= 2N interior nodes
/// x_k = k/(G+1). to_spectrum . to_grid is the identity on the retained
/// band; quadrature weights are uniform 1/(G+1).
class GridProfile {
public:
    GridProfile(int n_modes, int grid_size);

    int n_modes() const { return n_modes_; }
    int grid_size() const { return grid_size_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& quadrature_weights() const { return weights_; }

    std::vector<double> to_grid(const SpectralVector& v) const;
    SpectralVector to_spectrum(std::span<const double> values) const;

    /// Pointwise product of two band-limited vectors via the grid,
    /// projected back onto the retained modes.
    SpectralVector multiply(const SpectralVector& v, const SpectralVector& w) const;

private:
    int n_modes_;
    int grid_size_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> basis_; // basis_[k*n_modes_+i] = sqrt(2) sin((i+1) pi x_k)
};

} // namespace spde
