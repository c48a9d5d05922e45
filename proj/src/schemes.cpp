#include "spde/schemes.hpp"

#include <cmath>

namespace spde {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::ExpEuler: return "exp_euler";
        case Scheme::ExpMilstein: return "exp_milstein";
        case Scheme::WagnerPlaten: return "wagner_platen";
    }
    return "unknown";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "exp_euler" || name == "euler") return Scheme::ExpEuler;
    if (name == "exp_milstein" || name == "milstein") return Scheme::ExpMilstein;
    if (name == "wagner_platen" || name == "wp") return Scheme::WagnerPlaten;
    throw std::invalid_argument("unknown scheme name: " + name);
}

CommutativityCertificate verify_commutativity(const Coefficients& c, int probes, double tol,
                                              std::uint64_t seed) {
    Rng rng = make_rng({seed, 99});
    std::normal_distribution<double> gauss;
    CommutativityCertificate cert;
    cert.first_kind = true;
    cert.second_kind = true;
    for (int s = 0; s < 2; ++s) {
        std::vector<double> coeffs(static_cast<std::size_t>(c.state_dim()));
        for (auto& x : coeffs) x = gauss(rng);
        const SpectralVector v(std::move(coeffs));
        const CommutativityResult first = check_commutativity_first(c, v, tol, probes, seed + static_cast<std::uint64_t>(s));
        const CommutativityResult second = check_commutativity_second(c, v, tol, probes, seed + static_cast<std::uint64_t>(s));
        cert.first_kind = cert.first_kind && first.pass;
        cert.second_kind = cert.second_kind && second.pass;
        cert.max_residual_first = std::max(cert.max_residual_first, first.max_residual);
        cert.max_residual_second = std::max(cert.max_residual_second, second.max_residual);
    }
    return cert;
}

StepContext::StepContext(OperatorSpec op, std::shared_ptr<const Coefficients> coeffs, NoiseSpec noise,
                         double dt, CommutativityMode mode,
                         std::optional<CommutativityCertificate> certificate)
    : op_(std::move(op)), coeffs_(std::move(coeffs)), noise_(std::move(noise)), dt_(dt), mode_(mode),
      certificate_(certificate ? *certificate : verify_commutativity(*coeffs_)),
      half_(op_, dt / 2.0), full_(op_, dt) {
    if (!(dt > 0.0))
        throw std::domain_error("StepContext: dt must be positive");
    if (coeffs_->state_dim() != op_.dimension())
        throw std::invalid_argument("StepContext: coefficients/operator dimension mismatch");
    if (coeffs_->noise_dim() != noise_.modes())
        throw std::invalid_argument("StepContext: coefficients/noise mode mismatch");
}

std::vector<double> StepContext::to_u0(std::span<const double> increments) const {
    std::vector<double> u(increments.begin(), increments.end());
    for (int j = 0; j < noise_.modes(); ++j)
        u[static_cast<std::size_t>(j)] /= std::sqrt(noise_.q(j));
    return u;
}

SuppliedIntegrals SuppliedIntegrals::zero(int modes) {
    SuppliedIntegrals s;
    s.modes = modes;
    s.single.assign(static_cast<std::size_t>(modes), 0.0);
    s.time_integral.assign(static_cast<std::size_t>(modes), 0.0);
    s.dbl.assign(static_cast<std::size_t>(modes * modes), 0.0);
    s.triple.assign(static_cast<std::size_t>(modes * modes * modes), 0.0);
    return s;
}

SuppliedIntegrals SuppliedIntegrals::commutative_closed_form(const NoiseSpec& noise, double dt,
                                                             const IncrementPair& pair) {
    const int j_modes = noise.modes();
    SuppliedIntegrals s = zero(j_modes);
    for (int j = 0; j < j_modes; ++j) {
        const double sq = std::sqrt(noise.q(j));
        s.single[static_cast<std::size_t>(j)] = pair.dw[static_cast<std::size_t>(j)] / sq;
        s.time_integral[static_cast<std::size_t>(j)] = pair.dz[static_cast<std::size_t>(j)] / sq;
    }
    for (int i = 0; i < j_modes; ++i)
        for (int j = 0; j < j_modes; ++j)
            s.dbl[static_cast<std::size_t>(i * j_modes + j)] =
                0.5 * (s.single[static_cast<std::size_t>(i)] * s.single[static_cast<std::size_t>(j)] -
                       (i == j ? dt : 0.0));
    for (int i = 0; i < j_modes; ++i)
        for (int j = 0; j < j_modes; ++j)
            for (int k = 0; k < j_modes; ++k) {
                const double si = s.single[static_cast<std::size_t>(i)];
                const double sj = s.single[static_cast<std::size_t>(j)];
                const double sk = s.single[static_cast<std::size_t>(k)];
                double val = si * sj * sk;
                if (i == j) val -= dt * sk;
                if (i == k) val -= dt * sj;
                if (j == k) val -= dt * si;
                s.triple[static_cast<std::size_t>((i * j_modes + j) * j_modes + k)] = val / 6.0;
            }
    return s;
}

SuppliedIntegrals SuppliedIntegrals::from_oracle(const IteratedIntegrals& oracle) {
    SuppliedIntegrals s;
    s.modes = oracle.modes;
    s.single = oracle.single;
    s.time_integral = oracle.time_integral;
    s.dbl = oracle.dbl;
    s.triple = oracle.triple;
    return s;
}

namespace {

class Accumulator {
public:
    explicit Accumulator(int n) : acc_(static_cast<std::size_t>(n), 0.0) {}

    void add(const SpectralVector& v, double scale, const char* term) {
        for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += scale * v.coeffs()[i];
        check(term);
    }
    void add(const SpectralVector& v, const char* term) { add(v, 1.0, term); }

    std::vector<double>& raw() { return acc_; }
    SpectralVector take() { return SpectralVector::unchecked(std::move(acc_)); }

private:
    void check(const char* term) {
        for (double x : acc_)
            if (!std::isfinite(x)) throw OverflowError(term);
    }
    std::vector<double> acc_;
};

SpectralVector drift_plus_generator(const StepContext& ctx, const SpectralVector& y) {
    SpectralVector f = ctx.coeffs().F(y);
    std::vector<double> out(f.coeffs());
    for (int i = 0; i < y.dimension(); ++i)
        out[static_cast<std::size_t>(i)] -= ctx.op().eigenvalue(i) * y[i];
    return SpectralVector::unchecked(std::move(out));
}

} // namespace

SpectralVector exp_euler_step(const StepContext& ctx, const SpectralVector& y,
                              const IncrementPair& pair) {
    const Coefficients& c = ctx.coeffs();
    Accumulator acc(y.dimension());
    acc.add(y, "Y");
    acc.add(c.F(y), ctx.dt(), "dt F(Y)");
    acc.add(c.B(y, ctx.to_u0(pair.dw)), "B(Y) dW");
    std::vector<double> out = std::move(acc.raw());
    ctx.full_step().apply_in_place(out);
    return SpectralVector::unchecked(std::move(out));
}

SpectralVector exp_milstein_step(const StepContext& ctx, const SpectralVector& y,
                                 const IncrementPair& pair) {
    if (!ctx.certificate().first_kind)
        throw CommutativityError(
            "exp_milstein_step: commutativity of the first kind not verified for these coefficients");
    const Coefficients& c = ctx.coeffs();
    const std::vector<double> dw = ctx.to_u0(pair.dw);
    Accumulator acc(y.dimension());
    acc.add(y, "Y");
    acc.add(c.F(y), ctx.dt(), "dt F(Y)");
    const SpectralVector bdw = c.B(y, dw);
    acc.add(bdw, "B(Y) dW");
    acc.add(c.dB(y, bdw, dw), 0.5, "B'(Y)(B(Y) dW) dW");
    acc.add(c.trace_BpB(y), -0.5 * ctx.dt(), "trace B'(Y)(B(Y) g_j) g_j");
    std::vector<double> out = std::move(acc.raw());
    ctx.full_step().apply_in_place(out);
    return SpectralVector::unchecked(std::move(out));
}

SpectralVector wagner_platen_step(const StepContext& ctx, const SpectralVector& y,
                                  const IncrementPair& pair) {
    if (!ctx.certificate().first_kind || !ctx.certificate().second_kind)
        throw CommutativityError(
            "wagner_platen_step: commutativity certificates required for the closed-form path");
    const Coefficients& c = ctx.coeffs();
    const double dt = ctx.dt();
    const std::vector<double> dw = ctx.to_u0(pair.dw);
    const std::vector<double> dz = ctx.to_u0(pair.dz);

    Accumulator acc(y.dimension());
    acc.add(ctx.half_step().apply(y), "e^{A dt/2} Y");
    const SpectralVector f = c.F(y);
    acc.add(f, dt, "dt F(Y)");

    SpectralVector ayf = [&] {
        std::vector<double> v(f.coeffs());
        for (int i = 0; i < y.dimension(); ++i)
            v[static_cast<std::size_t>(i)] -= ctx.op().eigenvalue(i) * y[i];
        return SpectralVector::unchecked(std::move(v));
    }();
    acc.add(c.dF(y, ayf), 0.5 * dt * dt, "dt^2/2 F'(Y)[AY+F(Y)]");

    const SpectralVector bdz = c.B(y, dz);
    acc.add(c.dF(y, bdz), "F'(Y)[B(Y) dZ]");
    acc.add(c.trace_F2(y), 0.25 * dt * dt, "dt^2/4 trace F''(B g_j, B g_j)");

    const SpectralVector bdw = c.B(y, dw);
    acc.add(bdw, "B(Y) dW");

    // A [ B(Y) dZ - (dt/2) B(Y) dW ]
    {
        std::vector<double> v(static_cast<std::size_t>(y.dimension()));
        for (int i = 0; i < y.dimension(); ++i)
            v[static_cast<std::size_t>(i)] =
                -ctx.op().eigenvalue(i) * (bdz[i] - 0.5 * dt * bdw[i]);
        acc.add(SpectralVector::unchecked(std::move(v)), "A[B dZ - dt/2 B dW]");
    }

    // B'(Y)(AY+F(Y)) applied to dt dW - dZ
    {
        std::vector<double> u(static_cast<std::size_t>(ctx.noise().modes()));
        for (int j = 0; j < ctx.noise().modes(); ++j)
            u[static_cast<std::size_t>(j)] =
                dt * dw[static_cast<std::size_t>(j)] - dz[static_cast<std::size_t>(j)];
        acc.add(c.dB(y, ayf, u), "B'(Y)(AY+F)(dt dW - dZ)");
    }

    const SpectralVector bpbdw = c.dB(y, bdw, dw);
    acc.add(bpbdw, 0.5, "1/2 B'(Y)(B dW) dW");
    acc.add(c.d2B(y, bdw, bdw, dw), 1.0 / 6.0, "1/6 B''(Y)(B dW, B dW) dW");
    acc.add(c.dB(y, bpbdw, dw), 1.0 / 6.0, "1/6 B'(Y)(B'(B dW) dW) dW");

    acc.add(c.trace_BpB(y), -0.5 * dt, "dt/2 trace B'(B g_j) g_j");
    acc.add(c.trace_BppBB(y, dw), -0.5 * dt, "dt/2 trace B''(B g_j, B g_j) dW");
    acc.add(c.trace_BpBpB(y, dw), -0.5 * dt, "dt/2 trace B'(B'(B g_j) g_j) dW");

    std::vector<double> out = std::move(acc.raw());
    ctx.half_step().apply_in_place(out);
    return SpectralVector::unchecked(std::move(out));
}

SpectralVector wagner_platen_step_integral_form(const StepContext& ctx, const SpectralVector& y,
                                                const SuppliedIntegrals& ints) {
    const Coefficients& c = ctx.coeffs();
    const int j_modes = ctx.noise().modes();
    if (ints.modes != j_modes)
        throw std::invalid_argument("wagner_platen_step_integral_form: integral dimension mismatch");
    const double dt = ctx.dt();

    Accumulator acc(y.dimension());
    acc.add(ctx.half_step().apply(y), "e^{A dt/2} Y");
    const SpectralVector f = c.F(y);
    acc.add(f, dt, "dt F(Y)");

    const SpectralVector ayf = drift_plus_generator(ctx, y);
    acc.add(c.dF(y, ayf), 0.5 * dt * dt, "dt^2/2 F'(Y)[AY+F(Y)]");

    const SpectralVector bdz = c.B(y, ints.time_integral);
    acc.add(c.dF(y, bdz), "F'(Y)[B(Y) dZ]");
    acc.add(c.trace_F2(y), 0.25 * dt * dt, "dt^2/4 trace F''(B g_j, B g_j)");

    const SpectralVector bdw = c.B(y, ints.single);
    acc.add(bdw, "B(Y) dW");
    {
        std::vector<double> v(static_cast<std::size_t>(y.dimension()));
        for (int i = 0; i < y.dimension(); ++i)
            v[static_cast<std::size_t>(i)] =
                -ctx.op().eigenvalue(i) * (bdz[i] - 0.5 * dt * bdw[i]);
        acc.add(SpectralVector::unchecked(std::move(v)), "A[B dZ - dt/2 B dW]");
    }

    acc.add(c.dB(y, ayf, ints.single), dt, "dt B'(Y)(AY+F) dW");
    acc.add(c.dB(y, ayf, ints.time_integral), -1.0, "-B'(Y)(AY+F) dZ");

    // double and triple iterated-integral contractions
    std::vector<SpectralVector> b_modes;
    b_modes.reserve(static_cast<std::size_t>(j_modes));
    for (int i = 0; i < j_modes; ++i) b_modes.push_back(c.B_mode(y, i));

    for (int i = 0; i < j_modes; ++i)
        for (int j = 0; j < j_modes; ++j) {
            const double w = ints.dbl[static_cast<std::size_t>(i * j_modes + j)];
            if (w != 0.0)
                acc.add(c.dB_mode(y, b_modes[static_cast<std::size_t>(i)], j), w,
                        "B'(B g_i) g_j I_(i,j)");
        }

    for (int i = 0; i < j_modes; ++i)
        for (int j = 0; j < j_modes; ++j) {
            const SpectralVector inner = c.dB_mode(y, b_modes[static_cast<std::size_t>(i)], j);
            for (int k = 0; k < j_modes; ++k) {
                const double t_ijk = ints.triple[static_cast<std::size_t>((i * j_modes + j) * j_modes + k)];
                const double t_jik = ints.triple[static_cast<std::size_t>((j * j_modes + i) * j_modes + k)];
                if (t_ijk != 0.0)
                    acc.add(c.dB_mode(y, inner, k), t_ijk, "B'(B'(B g_i) g_j) g_k I_(i,j,k)");
                const double w2 = 0.5 * (t_ijk + t_jik);
                if (w2 != 0.0)
                    acc.add(c.d2B_mode(y, b_modes[static_cast<std::size_t>(i)],
                                       b_modes[static_cast<std::size_t>(j)], k),
                            w2, "1/2 B''(B g_i, B g_j) g_k (I_(i,j,k)+I_(j,i,k))");
            }
        }

    std::vector<double> out = std::move(acc.raw());
    ctx.half_step().apply_in_place(out);
    return SpectralVector::unchecked(std::move(out));
}

SpectralVector evolve(const StepContext& ctx, Scheme scheme, const SpectralVector& y0,
                      std::span<const IncrementPair> pairs, const EvolveOptions& opts) {
    if (pairs.empty())
        throw std::invalid_argument("evolve: needs at least one step");
    SpectralVector y = y0;
    int m = 0;
    for (const IncrementPair& p : pairs) {
        switch (scheme) {
            case Scheme::ExpEuler: y = exp_euler_step(ctx, y, p); break;
            case Scheme::ExpMilstein: y = exp_milstein_step(ctx, y, p); break;
            case Scheme::WagnerPlaten: y = wagner_platen_step(ctx, y, p); break;
        }
        ++m;
        if (opts.observer) opts.observer(m, y);
    }
    return y;
}

} // namespace spde
