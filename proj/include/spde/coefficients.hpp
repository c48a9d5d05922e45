#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spde/errors.hpp"
#include "spde/spectral.hpp"
#include "spde/stochastics.hpp"

namespace spde {

/// Declared regularity metadata (alpha, beta, gamma, delta). Validated only
/// against the admissible-exponent chains; functional-analytic regularity is
/// the user's claim.
struct RegularityExponents {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    double delta = 1.0;

    /// Throws ConstraintError naming the violated inequality.
    void validate() const;
};

/// Drift/diffusion bundle exposing exactly the derivative actions the
/// steppers need. Noise directions u are given by their components in the
/// orthonormal U_0 basis (g_j).
///
/// All evaluations are pure; instances are immutable and shareable.
class Coefficients {
public:
    virtual ~Coefficients() = default;

    virtual int state_dim() const = 0;
    virtual int noise_dim() const = 0;
    virtual const RegularityExponents& exponents() const { return exponents_; }
    virtual std::string name() const = 0;

    virtual SpectralVector F(const SpectralVector& v) const = 0;
    virtual SpectralVector dF(const SpectralVector& v, const SpectralVector& w) const = 0;
    virtual SpectralVector d2F(const SpectralVector& v, const SpectralVector& w1,
                               const SpectralVector& w2) const = 0;

    virtual SpectralVector B(const SpectralVector& v, std::span<const double> u) const;
    virtual SpectralVector B_mode(const SpectralVector& v, int j) const = 0;
    virtual SpectralVector dB(const SpectralVector& v, const SpectralVector& w,
                              std::span<const double> u) const;
    virtual SpectralVector dB_mode(const SpectralVector& v, const SpectralVector& w, int j) const = 0;
    virtual SpectralVector d2B(const SpectralVector& v, const SpectralVector& w1,
                               const SpectralVector& w2, std::span<const double> u) const;
    virtual SpectralVector d2B_mode(const SpectralVector& v, const SpectralVector& w1,
                                    const SpectralVector& w2, int j) const = 0;

    // Trace sums over the canonical U_0 basis. Generic defaults loop over
    // modes; built-ins may override with algebraically identical fast paths.

    /// sum_j F''(v)[B(v)g_j, B(v)g_j]
    virtual SpectralVector trace_F2(const SpectralVector& v) const;
    /// sum_j B'(v)(B(v)g_j)(g_j)
    virtual SpectralVector trace_BpB(const SpectralVector& v) const;
    /// sum_j B''(v)(B(v)g_j, B(v)g_j)(u)
    virtual SpectralVector trace_BppBB(const SpectralVector& v, std::span<const double> u) const;
    /// sum_j B'(v)( B'(v)(B(v)g_j)(g_j) )(u)
    virtual SpectralVector trace_BpBpB(const SpectralVector& v, std::span<const double> u) const;

protected:
    RegularityExponents exponents_;
};

// Trace sums over an explicit list of U_0 directions (each a vector of
// g-components). Used to check invariance under basis rotations.
SpectralVector trace_F2_basis(const Coefficients& c, const SpectralVector& v,
                              std::span<const std::vector<double>> basis);
SpectralVector trace_BpB_basis(const Coefficients& c, const SpectralVector& v,
                               std::span<const std::vector<double>> basis);
SpectralVector trace_BppBB_basis(const Coefficients& c, const SpectralVector& v,
                                 std::span<const double> u,
                                 std::span<const std::vector<double>> basis);
SpectralVector trace_BpBpB_basis(const Coefficients& c, const SpectralVector& v,
                                 std::span<const double> u,
                                 std::span<const std::vector<double>> basis);

/// Outcome of a probabilistic commutativity probe.
struct CommutativityResult {
    bool pass = false;
    double max_residual = 0.0;
};

/// Probes symmetry of (u1,u2) -> B'(v)(B(v)u1)(u2) on random direction
/// pairs; residuals are relative to the probed term scale.
CommutativityResult check_commutativity_first(const Coefficients& c, const SpectralVector& v,
                                              double tol = 1e-8, int probes = 32,
                                              std::uint64_t seed = 0x5eed);

/// Probes full S3 symmetry of
/// (u1,u2,u3) -> [ B'(v)(B'(v)(B(v)u1))(u2) + B''(v)(B(v)u1, B(v)u2) ](u3).
CommutativityResult check_commutativity_second(const Coefficients& c, const SpectralVector& v,
                                               double tol = 1e-8, int probes = 32,
                                               std::uint64_t seed = 0x5eed);

// ---- built-in catalog ----

/// F = 0, B = 0.
std::shared_ptr<const Coefficients> make_zero(int state_dim, int noise_dim);

/// F = 0, B(v)[g_j] = sigma sqrt(q_j) (v * e_{map(j)}) via collocation
/// product: the linear multiplicative noise of the stochastic heat equation.
std::shared_ptr<const Coefficients> make_linear_mult(const OperatorSpec& op, const NoiseSpec& noise,
                                                     double sigma = 1.0);

/// B = 0, F(v)(x) = c v(x) / (1 + v(x)^2) evaluated pseudospectrally on a
/// 2N collocation grid.
std::shared_ptr<const Coefficients> make_nemytskii_drift(int state_dim, int noise_dim, double c);

/// N = J = 1, F = 0, B(v)[g] = sigma sqrt(q) v: scalar geometric case with a
/// closed-form solution.
std::shared_ptr<const Coefficients> make_scalar_gbm(double sigma, double q);

/// Catalog lookup by name ("zero" | "linear_mult" | "nemytskii_drift" |
/// "scalar_gbm") with a parameter map.
std::shared_ptr<const Coefficients> make_coefficients(const std::string& name,
                                                      const std::map<std::string, double>& params,
                                                      const OperatorSpec& op,
                                                      const NoiseSpec& noise);

} // namespace spde
