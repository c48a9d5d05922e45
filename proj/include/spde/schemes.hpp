#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spde/coefficients.hpp"
#include "spde/errors.hpp"
#include "spde/spectral.hpp"
#include "spde/stochastics.hpp"

namespace spde {

enum class Scheme { ExpEuler, ExpMilstein, WagnerPlaten };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

enum class CommutativityMode { ClosedForm, SuppliedIntegrals };

/// Certificate that a coefficients instance passed the commutativity probes
/// at representative states. The closed-form paths refuse to run without it.
struct CommutativityCertificate {
    bool first_kind = false;
    bool second_kind = false;
    double max_residual_first = 0.0;
    double max_residual_second = 0.0;
};

CommutativityCertificate verify_commutativity(const Coefficients& c, int probes = 32,
                                              double tol = 1e-8, std::uint64_t seed = 0x5eed);

/// Per-step data shared by all steppers: operator, coefficients, noise, and
/// the fixed uniform step size dt = T/M. Immutable once constructed.
class StepContext {
public:
    StepContext(OperatorSpec op, std::shared_ptr<const Coefficients> coeffs, NoiseSpec noise,
                double dt, CommutativityMode mode = CommutativityMode::ClosedForm,
                std::optional<CommutativityCertificate> certificate = std::nullopt);

    const OperatorSpec& op() const { return op_; }
    const Coefficients& coeffs() const { return *coeffs_; }
    const NoiseSpec& noise() const { return noise_; }
    double dt() const { return dt_; }
    CommutativityMode mode() const { return mode_; }
    const CommutativityCertificate& certificate() const { return certificate_; }
    const SemigroupFactors& half_step() const { return half_; }
    const SemigroupFactors& full_step() const { return full_; }

    /// Converts increment components (Var q_j dt scaling) to components in
    /// the orthonormal U_0 basis (g_j).
    std::vector<double> to_u0(std::span<const double> increments) const;

private:
    OperatorSpec op_;
    std::shared_ptr<const Coefficients> coeffs_;
    NoiseSpec noise_;
    double dt_;
    CommutativityMode mode_;
    CommutativityCertificate certificate_;
    SemigroupFactors half_;
    SemigroupFactors full_;
};

/// Iterated-integral values over one step in the orthonormal U_0 scale:
/// single[i] = I_(i), time_integral[i] = int (beta_s - beta_t0) ds,
/// dbl[i][j] = I_(i,j), triple[i][j][k] = I_(i,j,k).
struct SuppliedIntegrals {
    int modes = 0;
    std::vector<double> single;
    std::vector<double> time_integral;
    std::vector<double> dbl;
    std::vector<double> triple;

    static SuppliedIntegrals zero(int modes);
    /// The closed-form substitution valid under commutative noise:
    /// dbl -> (I_i I_j - delta_ij dt)/2,
    /// triple -> (I_i I_j I_k - dt (delta_ij I_k + delta_ik I_j + delta_jk I_i))/6.
    static SuppliedIntegrals commutative_closed_form(const NoiseSpec& noise, double dt,
                                                     const IncrementPair& pair);
    static SuppliedIntegrals from_oracle(const IteratedIntegrals& oracle);
};

/// Y' = e^{A dt} ( Y + dt F(Y) + B(Y) dW ).
SpectralVector exp_euler_step(const StepContext& ctx, const SpectralVector& y,
                              const IncrementPair& pair);

/// Y' = e^{A dt} ( Y + dt F(Y) + B(Y) dW + (1/2) B'(Y)(B(Y) dW) dW
///                 - (dt/2) sum_j B'(Y)(B(Y) g_j) g_j ).
SpectralVector exp_milstein_step(const StepContext& ctx, const SpectralVector& y,
                                 const IncrementPair& pair);

/// The order-3/2 exponential step in its simulable commutative form: both
/// commutativity certificates are required.
SpectralVector wagner_platen_step(const StepContext& ctx, const SpectralVector& y,
                                  const IncrementPair& pair);

/// The same step with raw iterated integrals substituted term by term;
/// used to cross-validate the closed-form path.
SpectralVector wagner_platen_step_integral_form(const StepContext& ctx, const SpectralVector& y,
                                                const SuppliedIntegrals& ints);

struct EvolveOptions {
    /// Called after each step with (step index, state).
    std::function<void(int, const SpectralVector&)> observer;
};

/// Folds the chosen step over the provided increments.
SpectralVector evolve(const StepContext& ctx, Scheme scheme, const SpectralVector& y0,
                      std::span<const IncrementPair> pairs, const EvolveOptions& opts = {});

} // namespace spde
