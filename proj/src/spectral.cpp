#include "spde/spectral.hpp"

#include <cmath>

namespace spde {

OperatorSpec::OperatorSpec(std::vector<double> eigenvalues)
    : eigenvalues_(std::move(eigenvalues)) {
    if (eigenvalues_.empty())
        throw std::invalid_argument("OperatorSpec: empty eigenvalue sequence");
    double prev = 0.0;
    for (double lam : eigenvalues_) {
        if (!(lam > 0.0) || !std::isfinite(lam))
            throw std::invalid_argument("OperatorSpec: eigenvalues must be positive and finite");
        if (lam < prev)
            throw std::invalid_argument("OperatorSpec: eigenvalues must be nondecreasing");
        prev = lam;
    }
}

OperatorSpec OperatorSpec::dirichlet_laplacian(int n_modes) {
    if (n_modes < 1)
        throw std::invalid_argument("dirichlet_laplacian: n_modes must be >= 1");
    std::vector<double> lam(static_cast<std::size_t>(n_modes));
    const double pi = std::acos(-1.0);
    for (int i = 0; i < n_modes; ++i)
        lam[static_cast<std::size_t>(i)] = pi * pi * double(i + 1) * double(i + 1);
    return OperatorSpec(std::move(lam));
}

SpectralVector::SpectralVector(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    for (double c : coeffs_)
        if (!std::isfinite(c))
            throw std::invalid_argument("SpectralVector: non-finite coefficient");
}

bool SpectralVector::finite() const {
    for (double c : coeffs_)
        if (!std::isfinite(c)) return false;
    return true;
}

namespace {

void check_dim(const OperatorSpec& op, const SpectralVector& v, const char* where) {
    if (op.dimension() != v.dimension())
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

} // namespace

SpectralVector semigroup_apply(const OperatorSpec& op, double t, const SpectralVector& v) {
    if (t < 0.0)
        throw std::domain_error("semigroup_apply: negative time");
    check_dim(op, v, "semigroup_apply");
    if (t == 0.0) return v;
    std::vector<double> out(v.coeffs());
    for (int i = 0; i < v.dimension(); ++i)
        out[static_cast<std::size_t>(i)] *= std::exp(-op.eigenvalue(i) * t);
    return SpectralVector::unchecked(std::move(out));
}

SpectralVector fractional_apply(const OperatorSpec& op, double r, const SpectralVector& v) {
    check_dim(op, v, "fractional_apply");
    if (r == 0.0) return v;
    std::vector<double> out(v.coeffs());
    for (int i = 0; i < v.dimension(); ++i)
        out[static_cast<std::size_t>(i)] *= std::pow(op.eigenvalue(i), r);
    return SpectralVector::unchecked(std::move(out));
}

SpectralVector generator_apply(const OperatorSpec& op, const SpectralVector& v) {
    check_dim(op, v, "generator_apply");
    std::vector<double> out(v.coeffs());
    for (int i = 0; i < v.dimension(); ++i)
        out[static_cast<std::size_t>(i)] *= -op.eigenvalue(i);
    return SpectralVector::unchecked(std::move(out));
}

double norm_h(const SpectralVector& v) {
    double s = 0.0;
    for (double c : v.coeffs()) s += c * c;
    return std::sqrt(s);
}

double norm_hr(const OperatorSpec& op, double r, const SpectralVector& v) {
    check_dim(op, v, "norm_hr");
    double s = 0.0;
    for (int i = 0; i < v.dimension(); ++i) {
        double w = std::pow(op.eigenvalue(i), r) * v[i];
        s += w * w;
    }
    return std::sqrt(s);
}

SemigroupFactors::SemigroupFactors(const OperatorSpec& op, double t) {
    if (t < 0.0)
        throw std::domain_error("SemigroupFactors: negative time");
    factors_.resize(static_cast<std::size_t>(op.dimension()));
    for (int i = 0; i < op.dimension(); ++i)
        factors_[static_cast<std::size_t>(i)] = std::exp(-op.eigenvalue(i) * t);
}

void SemigroupFactors::apply_in_place(std::vector<double>& coeffs) const {
    if (coeffs.size() != factors_.size())
        throw std::invalid_argument("SemigroupFactors: dimension mismatch");
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        coeffs[i] *= factors_[i];
}

SpectralVector SemigroupFactors::apply(const SpectralVector& v) const {
    std::vector<double> out(v.coeffs());
    apply_in_place(out);
    return SpectralVector::unchecked(std::move(out));
}

GridProfile::GridProfile(int n_modes, int grid_size)
    : n_modes_(n_modes), grid_size_(grid_size) {
    if (n_modes < 1)
        throw std::invalid_argument("GridProfile: n_modes must be >= 1");
    if (grid_size < 2 * n_modes)
        throw std::invalid_argument("GridProfile: collocation size must be >= 2N");
    nodes_.resize(static_cast<std::size_t>(grid_size));
    weights_.assign(static_cast<std::size_t>(grid_size), 1.0 / double(grid_size + 1));
    basis_.resize(static_cast<std::size_t>(grid_size) * static_cast<std::size_t>(n_modes));
    const double pi = std::acos(-1.0);
    const double sqrt2 = std::sqrt(2.0);
    for (int k = 0; k < grid_size; ++k) {
        double x = double(k + 1) / double(grid_size + 1);
        nodes_[static_cast<std::size_t>(k)] = x;
        for (int i = 0; i < n_modes; ++i)
            basis_[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_modes) + static_cast<std::size_t>(i)] =
                sqrt2 * std::sin(double(i + 1) * pi * x);
    }
}

std::vector<double> GridProfile::to_grid(const SpectralVector& v) const {
    if (v.dimension() != n_modes_)
        throw std::invalid_argument("to_grid: dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(grid_size_), 0.0);
    for (int k = 0; k < grid_size_; ++k) {
        const double* row = &basis_[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_modes_)];
        double s = 0.0;
        for (int i = 0; i < n_modes_; ++i) s += row[i] * v[i];
        out[static_cast<std::size_t>(k)] = s;
    }
    return out;
}

SpectralVector GridProfile::to_spectrum(std::span<const double> values) const {
    if (static_cast<int>(values.size()) != grid_size_)
        throw std::invalid_argument("to_spectrum: grid size mismatch");
    std::vector<double> out(static_cast<std::size_t>(n_modes_), 0.0);
    const double w = 1.0 / double(grid_size_ + 1);
    for (int k = 0; k < grid_size_; ++k) {
        const double* row = &basis_[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_modes_)];
        const double vk = values[static_cast<std::size_t>(k)] * w;
        for (int i = 0; i < n_modes_; ++i)
            out[static_cast<std::size_t>(i)] += row[i] * vk;
    }
    return SpectralVector::unchecked(std::move(out));
}

SpectralVector GridProfile::multiply(const SpectralVector& v, const SpectralVector& w) const {
    std::vector<double> gv = to_grid(v);
    std::vector<double> gw = to_grid(w);
    for (std::size_t k = 0; k < gv.size(); ++k) gv[k] *= gw[k];
    return to_spectrum(gv);
}

} // namespace spde
