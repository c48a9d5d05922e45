#include "spde/stochastics.hpp"

#include <cmath>
#include <stdexcept>

namespace spde {

NoiseSpec::NoiseSpec(std::vector<double> q) : q_(std::move(q)) {
    if (q_.empty())
        throw std::invalid_argument("NoiseSpec: empty covariance sequence");
    mode_map_.resize(q_.size());
    for (std::size_t j = 0; j < q_.size(); ++j) {
        if (!(q_[j] > 0.0) || !std::isfinite(q_[j]))
            throw std::invalid_argument("NoiseSpec: covariance eigenvalues must be positive and finite");
        mode_map_[j] = static_cast<int>(j);
    }
}

NoiseSpec::NoiseSpec(std::vector<double> q, std::vector<int> mode_map) : NoiseSpec(std::move(q)) {
    if (mode_map.size() != q_.size())
        throw std::invalid_argument("NoiseSpec: mode_map size mismatch");
    mode_map_ = std::move(mode_map);
}

NoiseSpec NoiseSpec::inverse_spectrum(const OperatorSpec& op) {
    std::vector<double> q(static_cast<std::size_t>(op.dimension()));
    for (int i = 0; i < op.dimension(); ++i)
        q[static_cast<std::size_t>(i)] = 1.0 / op.eigenvalue(i);
    return NoiseSpec(std::move(q));
}

NoiseSpec NoiseSpec::uniform(int modes, double q) {
    return NoiseSpec(std::vector<double>(static_cast<std::size_t>(modes), q));
}

Rng make_rng(PathSeed seed) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed.master & 0xffffffffu),
        static_cast<std::uint32_t>(seed.master >> 32),
        static_cast<std::uint32_t>(seed.path & 0xffffffffu),
        static_cast<std::uint32_t>(seed.path >> 32)};
    return Rng(seq);
}

IncrementPair pair_from_normals(const NoiseSpec& noise, double dt,
                                std::span<const double> xi, std::span<const double> eta) {
    if (!(dt > 0.0))
        throw std::domain_error("pair_from_normals: dt must be positive");
    const int j_modes = noise.modes();
    if (static_cast<int>(xi.size()) != j_modes || static_cast<int>(eta.size()) != j_modes)
        throw std::invalid_argument("pair_from_normals: variate count mismatch");
    IncrementPair p;
    p.dw.resize(static_cast<std::size_t>(j_modes));
    p.dz.resize(static_cast<std::size_t>(j_modes));
    const double sdt = std::sqrt(dt);
    const double dt32 = dt * sdt;
    const double c_eta = 1.0 / (2.0 * std::sqrt(3.0));
    for (int j = 0; j < j_modes; ++j) {
        const double sq = std::sqrt(noise.q(j));
        p.dw[static_cast<std::size_t>(j)] = sq * sdt * xi[static_cast<std::size_t>(j)];
        p.dz[static_cast<std::size_t>(j)] =
            sq * dt32 * (0.5 * xi[static_cast<std::size_t>(j)] + c_eta * eta[static_cast<std::size_t>(j)]);
    }
    return p;
}

IncrementPair sample_pair(const NoiseSpec& noise, double dt, Rng& rng) {
    if (!(dt > 0.0))
        throw std::domain_error("sample_pair: dt must be positive");
    const int j_modes = noise.modes();
    std::vector<double> xi(static_cast<std::size_t>(j_modes)), eta(static_cast<std::size_t>(j_modes));
    std::normal_distribution<double> gauss;
    for (int j = 0; j < j_modes; ++j) {
        xi[static_cast<std::size_t>(j)] = gauss(rng);
        eta[static_cast<std::size_t>(j)] = gauss(rng);
    }
    return pair_from_normals(noise, dt, xi, eta);
}

IncrementPair aggregate_pairs(std::span<const IncrementPair> pairs, double delta) {
    if (pairs.empty())
        throw std::domain_error("aggregate_pairs: empty sub-step sequence");
    const int j_modes = pairs[0].modes();
    const int k = static_cast<int>(pairs.size());
    IncrementPair out;
    out.dw.assign(static_cast<std::size_t>(j_modes), 0.0);
    out.dz.assign(static_cast<std::size_t>(j_modes), 0.0);
    for (int m = 0; m < k; ++m) {
        const IncrementPair& p = pairs[static_cast<std::size_t>(m)];
        if (p.modes() != j_modes)
            throw std::invalid_argument("aggregate_pairs: mode count mismatch");
        const double lever = double(k - 1 - m) * delta;
        for (int j = 0; j < j_modes; ++j) {
            out.dw[static_cast<std::size_t>(j)] += p.dw[static_cast<std::size_t>(j)];
            out.dz[static_cast<std::size_t>(j)] +=
                p.dz[static_cast<std::size_t>(j)] + lever * p.dw[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

std::vector<IncrementPair> aggregate_stream(std::span<const IncrementPair> fine,
                                            int factor, double delta) {
    if (factor < 1 || static_cast<int>(fine.size()) % factor != 0)
        throw std::invalid_argument("aggregate_stream: factor must divide the fine step count");
    std::vector<IncrementPair> out;
    out.reserve(fine.size() / static_cast<std::size_t>(factor));
    for (std::size_t s = 0; s < fine.size(); s += static_cast<std::size_t>(factor))
        out.push_back(aggregate_pairs(fine.subspan(s, static_cast<std::size_t>(factor)), delta));
    return out;
}

PathStream::PathStream(PathSeed seed, const NoiseSpec& noise, double dt_fine)
    : noise_(&noise), dt_(dt_fine), rng_(make_rng(seed)),
      xi_(static_cast<std::size_t>(noise.modes())), eta_(static_cast<std::size_t>(noise.modes())) {
    if (!(dt_fine > 0.0))
        throw std::domain_error("PathStream: dt must be positive");
}

IncrementPair PathStream::next() {
    for (int j = 0; j < noise_->modes(); ++j) {
        xi_[static_cast<std::size_t>(j)] = gauss_(rng_);
        eta_[static_cast<std::size_t>(j)] = gauss_(rng_);
    }
    return pair_from_normals(*noise_, dt_, xi_, eta_);
}

std::vector<IncrementPair> PathStream::generate(int steps) {
    std::vector<IncrementPair> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) out.push_back(next());
    return out;
}

IteratedIntegrals iterated_integrals_oracle(const NoiseSpec& noise, double dt,
                                            std::span<const IncrementPair> sub_steps) {
    if (sub_steps.empty())
        throw std::domain_error("iterated_integrals_oracle: needs at least one sub-step");
    const int j_modes = noise.modes();
    const int n = static_cast<int>(sub_steps.size());
    const double delta = dt / double(n);

    IteratedIntegrals out;
    out.modes = j_modes;
    out.single.assign(static_cast<std::size_t>(j_modes), 0.0);
    out.time_integral.assign(static_cast<std::size_t>(j_modes), 0.0);
    out.dbl.assign(static_cast<std::size_t>(j_modes * j_modes), 0.0);
    out.triple.assign(static_cast<std::size_t>(j_modes * j_modes * j_modes), 0.0);

    std::vector<double> beta(static_cast<std::size_t>(j_modes), 0.0); // running left-point values
    std::vector<double> dbeta(static_cast<std::size_t>(j_modes));
    std::vector<double> dbl_run(static_cast<std::size_t>(j_modes * j_modes), 0.0);

    for (int m = 0; m < n; ++m) {
        const IncrementPair& p = sub_steps[static_cast<std::size_t>(m)];
        for (int j = 0; j < j_modes; ++j)
            dbeta[static_cast<std::size_t>(j)] =
                p.dw[static_cast<std::size_t>(j)] / std::sqrt(noise.q(j));

        // triple first: uses the double partial evaluated at the left point
        for (int i = 0; i < j_modes; ++i)
            for (int j = 0; j < j_modes; ++j) {
                const double dij = dbl_run[static_cast<std::size_t>(i * j_modes + j)];
                if (dij == 0.0) continue;
                for (int k = 0; k < j_modes; ++k)
                    out.triple[static_cast<std::size_t>((i * j_modes + j) * j_modes + k)] +=
                        dij * dbeta[static_cast<std::size_t>(k)];
            }
        for (int i = 0; i < j_modes; ++i)
            for (int j = 0; j < j_modes; ++j)
                dbl_run[static_cast<std::size_t>(i * j_modes + j)] +=
                    beta[static_cast<std::size_t>(i)] * dbeta[static_cast<std::size_t>(j)];
        for (int j = 0; j < j_modes; ++j) {
            out.time_integral[static_cast<std::size_t>(j)] += beta[static_cast<std::size_t>(j)] * delta;
            beta[static_cast<std::size_t>(j)] += dbeta[static_cast<std::size_t>(j)];
        }
    }
    out.single = beta;
    out.dbl = dbl_run;
    return out;
}

} // namespace spde
