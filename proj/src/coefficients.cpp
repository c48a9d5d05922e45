#include "spde/coefficients.hpp"

#include <cmath>
#include <random>

namespace spde {

void RegularityExponents::validate() const {
    if (!(gamma >= 1.0 && gamma < 1.5))
        throw ConstraintError("gamma in [1, 3/2)", "invalid regularity exponent gamma=" + std::to_string(gamma));
    if (!(alpha > gamma - 1.0 && alpha <= gamma))
        throw ConstraintError("alpha in (gamma-1, gamma]", "invalid regularity exponent alpha=" + std::to_string(alpha));
    if (!(beta > gamma - 0.5 && beta <= gamma))
        throw ConstraintError("beta in (gamma-1/2, gamma]", "invalid regularity exponent beta=" + std::to_string(beta));
    if (!(delta > gamma - 1.0 && delta <= beta))
        throw ConstraintError("delta in (gamma-1, beta]", "invalid regularity exponent delta=" + std::to_string(delta));
}

namespace {

void add_in_place(std::vector<double>& acc, const SpectralVector& v, double scale = 1.0) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * v.coeffs()[i];
}

SpectralVector wrap(std::vector<double> v) { return SpectralVector::unchecked(std::move(v)); }

} // namespace

SpectralVector Coefficients::B(const SpectralVector& v, std::span<const double> u) const {
    std::vector<double> acc(static_cast<std::size_t>(state_dim()), 0.0);
    for (int j = 0; j < noise_dim(); ++j)
        if (u[static_cast<std::size_t>(j)] != 0.0)
            add_in_place(acc, B_mode(v, j), u[static_cast<std::size_t>(j)]);
    return wrap(std::move(acc));
}

SpectralVector Coefficients::dB(const SpectralVector& v, const SpectralVector& w,
                                std::span<const double> u) const {
    std::vector<double> acc(static_cast<std::size_t>(state_dim()), 0.0);
    for (int j = 0; j < noise_dim(); ++j)
        if (u[static_cast<std::size_t>(j)] != 0.0)
            add_in_place(acc, dB_mode(v, w, j), u[static_cast<std::size_t>(j)]);
    return wrap(std::move(acc));
}

SpectralVector Coefficients::d2B(const SpectralVector& v, const SpectralVector& w1,
                                 const SpectralVector& w2, std::span<const double> u) const {
    std::vector<double> acc(static_cast<std::size_t>(state_dim()), 0.0);
    for (int j = 0; j < noise_dim(); ++j)
        if (u[static_cast<std::size_t>(j)] != 0.0)
            add_in_place(acc, d2B_mode(v, w1, w2, j), u[static_cast<std::size_t>(j)]);
    return wrap(std::move(acc));
}

SpectralVector Coefficients::trace_F2(const SpectralVector& v) const {
    std::vector<double> acc(static_cast<std::size_t>(state_dim()), 0.0);
    for (int j = 0; j < noise_dim(); ++j) {
        SpectralVector bj = B_mode(v, j);
        add_in_place(acc, d2F(v, bj, bj));
    }
    return wrap(std::move(acc));
}

SpectralVector Coefficients::trace_BpB(const SpectralVector& v) const {
    std::vector<double> acc(static_cast<std::size_t>(state_dim()), 0.0);
    for (int j = 0; j < noise_dim(); ++j)
        add_in_place(acc, dB_mode(v, B_mode(v, j), j));
    return wrap(std::move(acc));
}

SpectralVector Coefficients::trace_BppBB(const SpectralVector& v, std::span<const double> u) const {
    std::vector<double> acc(static_cast<std::size_t>(state_dim()), 0.0);
    for (int j = 0; j < noise_dim(); ++j) {
        SpectralVector bj = B_mode(v, j);
        add_in_place(acc, d2B(v, bj, bj, u));
    }
    return wrap(std::move(acc));
}

SpectralVector Coefficients::trace_BpBpB(const SpectralVector& v, std::span<const double> u) const {
    std::vector<double> acc(static_cast<std::size_t>(state_dim()), 0.0);
    for (int j = 0; j < noise_dim(); ++j)
        add_in_place(acc, dB(v, dB_mode(v, B_mode(v, j), j), u));
    return wrap(std::move(acc));
}

SpectralVector trace_F2_basis(const Coefficients& c, const SpectralVector& v,
                              std::span<const std::vector<double>> basis) {
    std::vector<double> acc(static_cast<std::size_t>(c.state_dim()), 0.0);
    for (const auto& b : basis) {
        SpectralVector bv = c.B(v, b);
        add_in_place(acc, c.d2F(v, bv, bv));
    }
    return wrap(std::move(acc));
}

SpectralVector trace_BpB_basis(const Coefficients& c, const SpectralVector& v,
                               std::span<const std::vector<double>> basis) {
    std::vector<double> acc(static_cast<std::size_t>(c.state_dim()), 0.0);
    for (const auto& b : basis)
        add_in_place(acc, c.dB(v, c.B(v, b), b));
    return wrap(std::move(acc));
}

SpectralVector trace_BppBB_basis(const Coefficients& c, const SpectralVector& v,
                                 std::span<const double> u,
                                 std::span<const std::vector<double>> basis) {
    std::vector<double> acc(static_cast<std::size_t>(c.state_dim()), 0.0);
    for (const auto& b : basis) {
        SpectralVector bv = c.B(v, b);
        add_in_place(acc, c.d2B(v, bv, bv, u));
    }
    return wrap(std::move(acc));
}

SpectralVector trace_BpBpB_basis(const Coefficients& c, const SpectralVector& v,
                                 std::span<const double> u,
                                 std::span<const std::vector<double>> basis) {
    std::vector<double> acc(static_cast<std::size_t>(c.state_dim()), 0.0);
    for (const auto& b : basis)
        add_in_place(acc, c.dB(v, c.dB(v, c.B(v, b), b), u));
    return wrap(std::move(acc));
}

namespace {

std::vector<double> random_direction(int j_modes, Rng& rng) {
    std::normal_distribution<double> gauss;
    std::vector<double> u(static_cast<std::size_t>(j_modes));
    for (auto& x : u) x = gauss(rng);
    return u;
}

double relative_gap(const SpectralVector& a, const SpectralVector& b) {
    double diff = 0.0, scale = 0.0;
    for (int i = 0; i < a.dimension(); ++i) {
        const double d = a[i] - b[i];
        diff += d * d;
        scale += a[i] * a[i] + b[i] * b[i];
    }
    if (scale == 0.0) return 0.0;
    return std::sqrt(diff / scale);
}

} // namespace

CommutativityResult check_commutativity_first(const Coefficients& c, const SpectralVector& v,
                                              double tol, int probes, std::uint64_t seed) {
    Rng rng = make_rng({seed, 1});
    CommutativityResult res;
    res.pass = true;
    for (int p = 0; p < probes; ++p) {
        const std::vector<double> u1 = random_direction(c.noise_dim(), rng);
        const std::vector<double> u2 = random_direction(c.noise_dim(), rng);
        const SpectralVector lhs = c.dB(v, c.B(v, u1), u2);
        const SpectralVector rhs = c.dB(v, c.B(v, u2), u1);
        res.max_residual = std::max(res.max_residual, relative_gap(lhs, rhs));
    }
    res.pass = res.max_residual <= tol;
    return res;
}

CommutativityResult check_commutativity_second(const Coefficients& c, const SpectralVector& v,
                                               double tol, int probes, std::uint64_t seed) {
    Rng rng = make_rng({seed, 2});
    CommutativityResult res;
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int p = 0; p < probes; ++p) {
        std::vector<double> u[3] = {random_direction(c.noise_dim(), rng),
                                    random_direction(c.noise_dim(), rng),
                                    random_direction(c.noise_dim(), rng)};
        SpectralVector bu[3] = {c.B(v, u[0]), c.B(v, u[1]), c.B(v, u[2])};
        auto term = [&](int a, int b, int d) {
            std::vector<double> acc(static_cast<std::size_t>(c.state_dim()), 0.0);
            add_in_place(acc, c.dB(v, c.dB(v, bu[a], u[b]), u[d]));
            add_in_place(acc, c.d2B(v, bu[a], bu[b], u[d]));
            return wrap(std::move(acc));
        };
        const SpectralVector ref = term(0, 1, 2);
        for (int q = 1; q < 6; ++q)
            res.max_residual = std::max(
                res.max_residual, relative_gap(ref, term(perms[q][0], perms[q][1], perms[q][2])));
    }
    res.pass = res.max_residual <= tol;
    return res;
}

// ---------------------------------------------------------------------------
// Built-ins
// ---------------------------------------------------------------------------

namespace {

class ZeroCoefficients final : public Coefficients {
public:
    ZeroCoefficients(int n, int j) : n_(n), j_(j) {}

    int state_dim() const override { return n_; }
    int noise_dim() const override { return j_; }
    std::string name() const override { return "zero"; }

    SpectralVector F(const SpectralVector&) const override { return SpectralVector::zero(n_); }
    SpectralVector dF(const SpectralVector&, const SpectralVector&) const override {
        return SpectralVector::zero(n_);
    }
    SpectralVector d2F(const SpectralVector&, const SpectralVector&, const SpectralVector&) const override {
        return SpectralVector::zero(n_);
    }
    SpectralVector B_mode(const SpectralVector&, int) const override { return SpectralVector::zero(n_); }
    SpectralVector dB_mode(const SpectralVector&, const SpectralVector&, int) const override {
        return SpectralVector::zero(n_);
    }
    SpectralVector d2B_mode(const SpectralVector&, const SpectralVector&, const SpectralVector&,
                            int) const override {
        return SpectralVector::zero(n_);
    }

private:
    int n_, j_;
};

// Multiplicative noise on the invertible N-point collocation algebra: every
// B-derivative action is a diagonal product in sample space, so the whole
// family commutes exactly and the closed-form integral identities hold at
// the discrete level, not just in the continuum limit.
class LinearMultCoefficients final : public Coefficients {
public:
    LinearMultCoefficients(const OperatorSpec& op, const NoiseSpec& noise, double sigma)
        : n_(op.dimension()), j_(noise.modes()), sigma_(sigma), sqrt_q_(static_cast<std::size_t>(j_)) {
        const double pi = std::acos(-1.0);
        const double sqrt2 = std::sqrt(2.0);
        sample_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
        for (int k = 0; k < n_; ++k) {
            const double x = double(k + 1) / double(n_ + 1);
            for (int i = 0; i < n_; ++i)
                sample_[idx(k, i)] = sqrt2 * std::sin(double(i + 1) * pi * x);
        }
        mode_samples_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(j_));
        rho_.assign(static_cast<std::size_t>(n_), 0.0);
        for (int j = 0; j < j_; ++j) {
            const int m = noise.mode_index(j);
            if (m < 0 || m >= n_)
                throw std::invalid_argument("linear_mult: mode_map index outside the state basis");
            sqrt_q_[static_cast<std::size_t>(j)] = std::sqrt(noise.q(j));
            for (int k = 0; k < n_; ++k) {
                const double e = sample_[idx(k, m)];
                mode_samples_[static_cast<std::size_t>(k) * static_cast<std::size_t>(j_) + static_cast<std::size_t>(j)] = e;
                rho_[static_cast<std::size_t>(k)] += sigma_ * sigma_ * noise.q(j) * e * e;
            }
        }
    }

    int state_dim() const override { return n_; }
    int noise_dim() const override { return j_; }
    std::string name() const override { return "linear_mult"; }

    SpectralVector F(const SpectralVector&) const override { return SpectralVector::zero(n_); }
    SpectralVector dF(const SpectralVector&, const SpectralVector&) const override {
        return SpectralVector::zero(n_);
    }
    SpectralVector d2F(const SpectralVector&, const SpectralVector&, const SpectralVector&) const override {
        return SpectralVector::zero(n_);
    }

    SpectralVector B(const SpectralVector& v, std::span<const double> u) const override {
        return product(v, weight_samples(u));
    }
    SpectralVector B_mode(const SpectralVector& v, int j) const override {
        return product(v, mode_weight(j));
    }
    SpectralVector dB(const SpectralVector&, const SpectralVector& w,
                      std::span<const double> u) const override {
        return product(w, weight_samples(u));
    }
    SpectralVector dB_mode(const SpectralVector&, const SpectralVector& w, int j) const override {
        return product(w, mode_weight(j));
    }
    SpectralVector d2B(const SpectralVector&, const SpectralVector&, const SpectralVector&,
                       std::span<const double>) const override {
        return SpectralVector::zero(n_);
    }
    SpectralVector d2B_mode(const SpectralVector&, const SpectralVector&, const SpectralVector&,
                            int) const override {
        return SpectralVector::zero(n_);
    }

    SpectralVector trace_F2(const SpectralVector&) const override { return SpectralVector::zero(n_); }
    SpectralVector trace_BpB(const SpectralVector& v) const override {
        std::vector<double> g = to_samples(v);
        for (int k = 0; k < n_; ++k) g[static_cast<std::size_t>(k)] *= rho_[static_cast<std::size_t>(k)];
        return from_samples(g);
    }
    SpectralVector trace_BppBB(const SpectralVector&, std::span<const double>) const override {
        return SpectralVector::zero(n_);
    }
    SpectralVector trace_BpBpB(const SpectralVector& v, std::span<const double> u) const override {
        std::vector<double> g = to_samples(v);
        const std::vector<double> w = weight_samples(u);
        for (int k = 0; k < n_; ++k)
            g[static_cast<std::size_t>(k)] *= rho_[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(k)];
        return from_samples(g);
    }

private:
    std::size_t idx(int k, int i) const {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
    }

    std::vector<double> to_samples(const SpectralVector& v) const {
        std::vector<double> g(static_cast<std::size_t>(n_), 0.0);
        for (int k = 0; k < n_; ++k) {
            double s = 0.0;
            for (int i = 0; i < n_; ++i) s += sample_[idx(k, i)] * v[i];
            g[static_cast<std::size_t>(k)] = s;
        }
        return g;
    }

    SpectralVector from_samples(const std::vector<double>& g) const {
        std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
        const double w = 1.0 / double(n_ + 1);
        for (int k = 0; k < n_; ++k) {
            const double gk = g[static_cast<std::size_t>(k)] * w;
            for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] += sample_[idx(k, i)] * gk;
        }
        return SpectralVector::unchecked(std::move(out));
    }

    std::vector<double> weight_samples(std::span<const double> u) const {
        if (static_cast<int>(u.size()) != j_)
            throw std::invalid_argument("linear_mult: noise direction dimension mismatch");
        std::vector<double> w(static_cast<std::size_t>(n_), 0.0);
        for (int j = 0; j < j_; ++j) {
            const double c = sigma_ * sqrt_q_[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
            if (c == 0.0) continue;
            for (int k = 0; k < n_; ++k)
                w[static_cast<std::size_t>(k)] +=
                    c * mode_samples_[static_cast<std::size_t>(k) * static_cast<std::size_t>(j_) + static_cast<std::size_t>(j)];
        }
        return w;
    }

    std::vector<double> mode_weight(int j) const {
        std::vector<double> w(static_cast<std::size_t>(n_));
        const double c = sigma_ * sqrt_q_[static_cast<std::size_t>(j)];
        for (int k = 0; k < n_; ++k)
            w[static_cast<std::size_t>(k)] =
                c * mode_samples_[static_cast<std::size_t>(k) * static_cast<std::size_t>(j_) + static_cast<std::size_t>(j)];
        return w;
    }

    SpectralVector product(const SpectralVector& v, const std::vector<double>& w) const {
        std::vector<double> g = to_samples(v);
        for (int k = 0; k < n_; ++k) g[static_cast<std::size_t>(k)] *= w[static_cast<std::size_t>(k)];
        return from_samples(g);
    }

    int n_, j_;
    double sigma_;
    std::vector<double> sqrt_q_;
    std::vector<double> sample_;       // n x n collocation matrix
    std::vector<double> mode_samples_; // n x j samples of the mapped basis functions
    std::vector<double> rho_;          // sum_j sigma^2 q_j e_j(x_k)^2
};

class NemytskiiDriftCoefficients final : public Coefficients {
public:
    NemytskiiDriftCoefficients(int n, int j, double c)
        : n_(n), j_(j), c_(c), grid_(n, 2 * n) {}

    int state_dim() const override { return n_; }
    int noise_dim() const override { return j_; }
    std::string name() const override { return "nemytskii_drift"; }

    SpectralVector F(const SpectralVector& v) const override {
        std::vector<double> g = grid_.to_grid(v);
        for (auto& y : g) y = f(y);
        return grid_.to_spectrum(g);
    }
    SpectralVector dF(const SpectralVector& v, const SpectralVector& w) const override {
        std::vector<double> g = grid_.to_grid(v);
        std::vector<double> gw = grid_.to_grid(w);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] = f1(g[k]) * gw[k];
        return grid_.to_spectrum(g);
    }
    SpectralVector d2F(const SpectralVector& v, const SpectralVector& w1,
                       const SpectralVector& w2) const override {
        std::vector<double> g = grid_.to_grid(v);
        std::vector<double> g1 = grid_.to_grid(w1);
        std::vector<double> g2 = grid_.to_grid(w2);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] = f2(g[k]) * g1[k] * g2[k];
        return grid_.to_spectrum(g);
    }

    SpectralVector B_mode(const SpectralVector&, int) const override { return SpectralVector::zero(n_); }
    SpectralVector dB_mode(const SpectralVector&, const SpectralVector&, int) const override {
        return SpectralVector::zero(n_);
    }
    SpectralVector d2B_mode(const SpectralVector&, const SpectralVector&, const SpectralVector&,
                            int) const override {
        return SpectralVector::zero(n_);
    }

private:
    double f(double y) const { return c_ * y / (1.0 + y * y); }
    double f1(double y) const {
        const double d = 1.0 + y * y;
        return c_ * (1.0 - y * y) / (d * d);
    }
    double f2(double y) const {
        const double d = 1.0 + y * y;
        return c_ * (2.0 * y * y * y - 6.0 * y) / (d * d * d);
    }

    int n_, j_;
    double c_;
    GridProfile grid_;
};

class ScalarGbmCoefficients final : public Coefficients {
public:
    ScalarGbmCoefficients(double sigma, double q) : scale_(sigma * std::sqrt(q)) {}

    int state_dim() const override { return 1; }
    int noise_dim() const override { return 1; }
    std::string name() const override { return "scalar_gbm"; }

    SpectralVector F(const SpectralVector&) const override { return SpectralVector::zero(1); }
    SpectralVector dF(const SpectralVector&, const SpectralVector&) const override {
        return SpectralVector::zero(1);
    }
    SpectralVector d2F(const SpectralVector&, const SpectralVector&, const SpectralVector&) const override {
        return SpectralVector::zero(1);
    }
    SpectralVector B_mode(const SpectralVector& v, int) const override {
        return SpectralVector::unchecked({scale_ * v[0]});
    }
    SpectralVector dB_mode(const SpectralVector&, const SpectralVector& w, int) const override {
        return SpectralVector::unchecked({scale_ * w[0]});
    }
    SpectralVector d2B_mode(const SpectralVector&, const SpectralVector&, const SpectralVector&,
                            int) const override {
        return SpectralVector::zero(1);
    }

private:
    double scale_;
};

double param_or(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

} // namespace

std::shared_ptr<const Coefficients> make_zero(int state_dim, int noise_dim) {
    return std::make_shared<ZeroCoefficients>(state_dim, noise_dim);
}

std::shared_ptr<const Coefficients> make_linear_mult(const OperatorSpec& op, const NoiseSpec& noise,
                                                     double sigma) {
    return std::make_shared<LinearMultCoefficients>(op, noise, sigma);
}

std::shared_ptr<const Coefficients> make_nemytskii_drift(int state_dim, int noise_dim, double c) {
    return std::make_shared<NemytskiiDriftCoefficients>(state_dim, noise_dim, c);
}

std::shared_ptr<const Coefficients> make_scalar_gbm(double sigma, double q) {
    return std::make_shared<ScalarGbmCoefficients>(sigma, q);
}

std::shared_ptr<const Coefficients> make_coefficients(const std::string& name,
                                                      const std::map<std::string, double>& params,
                                                      const OperatorSpec& op,
                                                      const NoiseSpec& noise) {
    if (name == "zero") return make_zero(op.dimension(), noise.modes());
    if (name == "linear_mult") return make_linear_mult(op, noise, param_or(params, "sigma", 1.0));
    if (name == "nemytskii_drift")
        return make_nemytskii_drift(op.dimension(), noise.modes(), param_or(params, "c", 1.0));
    if (name == "scalar_gbm")
        return make_scalar_gbm(param_or(params, "sigma", 1.0), noise.q(0));
    throw std::invalid_argument("unknown coefficients name: " + name);
}

} // namespace spde
