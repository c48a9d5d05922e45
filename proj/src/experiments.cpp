#include "spde/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace spde {

const char* const library_version = "0.1.0";

std::string norm_name(ErrorNorm n) { return n == ErrorNorm::H ? "h" : "h_gamma"; }

ErrorNorm norm_from_name(const std::string& name) {
    if (name == "h") return ErrorNorm::H;
    if (name == "h_gamma") return ErrorNorm::HGamma;
    throw std::invalid_argument("unknown error norm: " + name);
}

void StudyPlan::validate() const {
    exponents.validate();
    if (modes < 1) throw std::invalid_argument("StudyPlan: modes must be >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("StudyPlan: horizon must be positive");
    if (paths < 2) throw std::invalid_argument("StudyPlan: needs at least 2 paths");
    if (resolutions.empty()) throw std::invalid_argument("StudyPlan: empty resolution list");
    int prev = 0;
    for (int m : resolutions) {
        if (m <= prev) throw std::invalid_argument("StudyPlan: resolutions must be strictly increasing");
        if (ref_resolution % m != 0)
            throw std::invalid_argument("StudyPlan: every resolution must divide the reference resolution");
        prev = m;
    }
    if (schemes.empty()) throw std::invalid_argument("StudyPlan: empty scheme list");
    if (threads < 1) throw std::invalid_argument("StudyPlan: threads must be >= 1");
}

namespace {

double param_or(const StudyPlan& plan, const std::string& key, double fallback) {
    auto it = plan.params.find(key);
    return it == plan.params.end() ? fallback : it->second;
}

} // namespace

Problem build_problem(const StudyPlan& plan) {
    if (plan.problem == "scalar_gbm") {
        const double lambda = param_or(plan, "lambda", 1.0);
        const double sigma = param_or(plan, "sigma", 1.0);
        const double q = param_or(plan, "q", 1.0);
        const double xi = param_or(plan, "xi", 1.0);
        OperatorSpec op({lambda});
        NoiseSpec noise = NoiseSpec::uniform(1, q);
        Problem prob{op, noise, make_scalar_gbm(sigma, q), SpectralVector({xi}), true,
                     lambda, sigma, q};
        return prob;
    }
    OperatorSpec op = OperatorSpec::dirichlet_laplacian(plan.modes);
    const double q_uniform = param_or(plan, "q_uniform", 0.0);
    const double q_scale = param_or(plan, "q_scale", 1.0);
    NoiseSpec noise = q_uniform > 0.0 ? NoiseSpec::uniform(plan.modes, q_uniform)
                                      : NoiseSpec::inverse_spectrum(op);
    if (q_scale != 1.0) {
        std::vector<double> q = noise.q();
        for (double& x : q) x *= q_scale;
        noise = NoiseSpec(std::move(q));
    }
    std::shared_ptr<const Coefficients> coeffs =
        make_coefficients(plan.problem, plan.params, op, noise);
    std::vector<double> xi(static_cast<std::size_t>(plan.modes), 0.0);
    xi[0] = param_or(plan, "xi", 1.0);
    return Problem{std::move(op), std::move(noise), std::move(coeffs),
                   SpectralVector(std::move(xi)), false, 0.0, 0.0, 0.0};
}

namespace {

double error_norm(const Problem& prob, const StudyPlan& plan, const SpectralVector& v) {
    if (plan.norm == ErrorNorm::H) return norm_h(v);
    return norm_hr(prob.op, plan.exponents.gamma, v);
}

SpectralVector gbm_exact_terminal(const Problem& prob, const StudyPlan& plan, double w_total) {
    const double drift = -prob.gbm_lambda - 0.5 * prob.gbm_sigma * prob.gbm_sigma * prob.gbm_q;
    const double x0 = prob.initial[0];
    return SpectralVector({x0 * std::exp(drift * plan.horizon + prob.gbm_sigma * w_total)});
}

struct PathError {
    double sq = 0.0;
    bool aborted = false;
};

struct StudyAccumulator {
    // indexed [combo][path], combo = scheme_idx * n_resolutions + m_idx
    std::vector<std::vector<PathError>> errors;
    std::vector<double> seconds;
};

/// rms + delta-method standard error over the non-aborted paths in path order.
std::pair<double, double> reduce_rms(const std::vector<PathError>& errs, int* aborted_out) {
    std::vector<double> sq;
    sq.reserve(errs.size());
    int aborted = 0;
    for (const PathError& e : errs) {
        if (e.aborted) { ++aborted; continue; }
        sq.push_back(e.sq);
    }
    if (aborted_out) *aborted_out = aborted;
    if (sq.empty()) throw std::runtime_error("study error: all paths aborted for a configuration");
    const double n = double(sq.size());
    const double mean_sq = pairwise_sum(sq) / n;
    const double rms = std::sqrt(mean_sq);
    std::vector<double> dev(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        const double d = sq[i] - mean_sq;
        dev[i] = d * d;
    }
    double se = 0.0;
    if (sq.size() > 1 && rms > 0.0) {
        const double var_sq = pairwise_sum(dev) / (n - 1.0);
        se = std::sqrt(var_sq / n) / (2.0 * rms);
    }
    return {rms, se};
}

void run_paths(const StudyPlan& plan, const Problem& prob, const CommutativityCertificate& cert,
               const StepContext& ctx_ref, const std::vector<StepContext>& ctx_m,
               int path_begin, int path_end, StudyAccumulator& acc) {
    const int n_res = static_cast<int>(plan.resolutions.size());
    const int n_schemes = static_cast<int>(plan.schemes.size());
    const double dt_fine = plan.horizon / double(plan.ref_resolution);
    (void)cert;
    for (int p = path_begin; p < path_end; ++p) {
        PathStream stream({plan.seed, static_cast<std::uint64_t>(p)}, prob.noise, dt_fine);
        const std::vector<IncrementPair> fine = stream.generate(plan.ref_resolution);

        SpectralVector ref;
        bool ref_aborted = false;
        try {
            if (prob.exact_reference) {
                double w_total = 0.0;
                for (const IncrementPair& pr : fine) w_total += pr.dw[0];
                ref = gbm_exact_terminal(prob, plan, w_total);
            } else {
                ref = evolve(ctx_ref, Scheme::WagnerPlaten, prob.initial, fine);
            }
        } catch (const OverflowError&) {
            ref_aborted = true;
        }

        for (int mi = 0; mi < n_res; ++mi) {
            const int m = plan.resolutions[static_cast<std::size_t>(mi)];
            const std::vector<IncrementPair> coarse =
                aggregate_stream(fine, plan.ref_resolution / m, dt_fine);
            for (int si = 0; si < n_schemes; ++si) {
                const int combo = si * n_res + mi;
                PathError& pe = acc.errors[static_cast<std::size_t>(combo)][static_cast<std::size_t>(p)];
                if (ref_aborted) { pe.aborted = true; continue; }
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    const SpectralVector y =
                        evolve(ctx_m[static_cast<std::size_t>(mi)],
                               plan.schemes[static_cast<std::size_t>(si)], prob.initial, coarse);
                    std::vector<double> diff(ref.coeffs());
                    for (int i = 0; i < ref.dimension(); ++i) diff[static_cast<std::size_t>(i)] -= y[i];
                    const double e = error_norm(prob, plan, SpectralVector::unchecked(std::move(diff)));
                    pe.sq = e * e;
                } catch (const OverflowError&) {
                    pe.aborted = true;
                }
                const auto t1 = std::chrono::steady_clock::now();
                acc.seconds[static_cast<std::size_t>(combo)] +=
                    std::chrono::duration<double>(t1 - t0).count();
            }
        }
    }
}

} // namespace

ConvergenceReport run_study(const StudyPlan& plan) {
    plan.validate();
    const Problem prob = build_problem(plan);
    const CommutativityCertificate cert = verify_commutativity(*prob.coeffs);

    const double t_ref = plan.horizon / double(plan.ref_resolution);
    StepContext ctx_ref(prob.op, prob.coeffs, prob.noise, t_ref, CommutativityMode::ClosedForm, cert);
    std::vector<StepContext> ctx_m;
    ctx_m.reserve(plan.resolutions.size());
    for (int m : plan.resolutions)
        ctx_m.emplace_back(prob.op, prob.coeffs, prob.noise, plan.horizon / double(m),
                           CommutativityMode::ClosedForm, cert);

    const int n_res = static_cast<int>(plan.resolutions.size());
    const int n_schemes = static_cast<int>(plan.schemes.size());
    const int n_combo = n_res * n_schemes;

    const int n_threads = std::min(plan.threads, plan.paths);
    std::vector<StudyAccumulator> partial(static_cast<std::size_t>(n_threads));
    for (auto& a : partial) {
        a.errors.assign(static_cast<std::size_t>(n_combo),
                        std::vector<PathError>(static_cast<std::size_t>(plan.paths)));
        a.seconds.assign(static_cast<std::size_t>(n_combo), 0.0);
    }

    if (n_threads == 1) {
        run_paths(plan, prob, cert, ctx_ref, ctx_m, 0, plan.paths, partial[0]);
    } else {
        std::vector<std::thread> workers;
        const int chunk = (plan.paths + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(plan.paths, lo + chunk);
            workers.emplace_back([&, t, lo, hi] {
                run_paths(plan, prob, cert, ctx_ref, ctx_m, lo, hi,
                          partial[static_cast<std::size_t>(t)]);
            });
        }
        for (auto& w : workers) w.join();
    }

    // merge in fixed path order
    StudyAccumulator merged;
    merged.errors.assign(static_cast<std::size_t>(n_combo),
                         std::vector<PathError>(static_cast<std::size_t>(plan.paths)));
    merged.seconds.assign(static_cast<std::size_t>(n_combo), 0.0);
    if (n_threads == 1) {
        merged = std::move(partial[0]);
    } else {
        const int chunk = (plan.paths + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(plan.paths, lo + chunk);
            for (int combo = 0; combo < n_combo; ++combo) {
                for (int p = lo; p < hi; ++p)
                    merged.errors[static_cast<std::size_t>(combo)][static_cast<std::size_t>(p)] =
                        partial[static_cast<std::size_t>(t)]
                            .errors[static_cast<std::size_t>(combo)][static_cast<std::size_t>(p)];
                merged.seconds[static_cast<std::size_t>(combo)] +=
                    partial[static_cast<std::size_t>(t)].seconds[static_cast<std::size_t>(combo)];
            }
        }
    }

    ConvergenceReport report;
    for (int si = 0; si < n_schemes; ++si) {
        std::vector<std::pair<int, double>> points;
        for (int mi = 0; mi < n_res; ++mi) {
            const int combo = si * n_res + mi;
            SchemeResult r;
            r.scheme = plan.schemes[static_cast<std::size_t>(si)];
            r.resolution = plan.resolutions[static_cast<std::size_t>(mi)];
            auto [rms, se] = reduce_rms(merged.errors[static_cast<std::size_t>(combo)], &r.aborted);
            r.rms = rms;
            r.stderr_ = se;
            r.seconds = merged.seconds[static_cast<std::size_t>(combo)];
            report.results.push_back(r);
            if (rms > 0.0) points.emplace_back(r.resolution, rms);
        }
        if (points.size() >= 3)
            report.orders.push_back({plan.schemes[static_cast<std::size_t>(si)],
                                     fit_order(points)});
    }
    return report;
}

SpectralVector reference_solution(const StudyPlan& plan, int path_index) {
    const Problem prob = build_problem(plan);
    if (!prob.exact_reference) {
        const int max_m = plan.resolutions.back();
        if (plan.ref_resolution < 8 * max_m)
            throw std::invalid_argument(
                "reference_solution: reference resolution must be >= 8x the finest measured resolution");
    }
    const double dt_fine = plan.horizon / double(plan.ref_resolution);
    PathStream stream({plan.seed, static_cast<std::uint64_t>(path_index)}, prob.noise, dt_fine);
    const std::vector<IncrementPair> fine = stream.generate(plan.ref_resolution);
    if (prob.exact_reference) {
        double w_total = 0.0;
        for (const IncrementPair& pr : fine) w_total += pr.dw[0];
        return gbm_exact_terminal(prob, plan, w_total);
    }
    StepContext ctx(prob.op, prob.coeffs, prob.noise, dt_fine);
    return evolve(ctx, Scheme::WagnerPlaten, prob.initial, fine);
}

std::pair<double, double> strong_error(const StudyPlan& plan, Scheme scheme, int resolution) {
    StudyPlan single = plan;
    single.resolutions = {resolution};
    single.schemes = {scheme};
    const ConvergenceReport rep = run_study(single);
    return {rep.results.at(0).rms, rep.results.at(0).stderr_};
}

MomentReport moment_probe(const StudyPlan& plan, Scheme scheme) {
    plan.validate();
    const Problem prob = build_problem(plan);
    const CommutativityCertificate cert = verify_commutativity(*prob.coeffs);
    const int fine_m = plan.resolutions.back();
    const double dt_fine = plan.horizon / double(fine_m);

    std::vector<StepContext> ctx_m;
    for (int m : plan.resolutions)
        ctx_m.emplace_back(prob.op, prob.coeffs, prob.noise, plan.horizon / double(m),
                           CommutativityMode::ClosedForm, cert);

    const int n_res = static_cast<int>(plan.resolutions.size());
    std::vector<std::vector<PathError>> moments(
        static_cast<std::size_t>(n_res),
        std::vector<PathError>(static_cast<std::size_t>(plan.paths)));

    for (int p = 0; p < plan.paths; ++p) {
        PathStream stream({plan.seed, static_cast<std::uint64_t>(p)}, prob.noise, dt_fine);
        const std::vector<IncrementPair> fine = stream.generate(fine_m);
        for (int mi = 0; mi < n_res; ++mi) {
            const int m = plan.resolutions[static_cast<std::size_t>(mi)];
            const std::vector<IncrementPair> coarse = aggregate_stream(fine, fine_m / m, dt_fine);
            PathError& pe = moments[static_cast<std::size_t>(mi)][static_cast<std::size_t>(p)];
            try {
                const SpectralVector y = evolve(ctx_m[static_cast<std::size_t>(mi)], scheme,
                                                prob.initial, coarse);
                const double n = norm_hr(prob.op, plan.exponents.gamma, y);
                pe.sq = n * n;
            } catch (const OverflowError&) {
                pe.aborted = true;
            }
        }
    }

    MomentReport rep;
    std::vector<double> means;
    for (int mi = 0; mi < n_res; ++mi) {
        MomentRow row;
        row.resolution = plan.resolutions[static_cast<std::size_t>(mi)];
        std::vector<double> vals;
        for (const PathError& e : moments[static_cast<std::size_t>(mi)]) {
            if (e.aborted) { ++row.aborted; continue; }
            vals.push_back(e.sq);
        }
        if (vals.empty()) throw std::runtime_error("moment_probe: all paths aborted");
        const double n = double(vals.size());
        row.moment = pairwise_sum(vals) / n;
        if (vals.size() > 1) {
            std::vector<double> dev(vals.size());
            for (std::size_t i = 0; i < vals.size(); ++i) {
                const double d = vals[i] - row.moment;
                dev[i] = d * d;
            }
            row.stderr_ = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
        }
        means.push_back(row.moment);
        rep.rows.push_back(row);
    }

    rep.spearman = spearman_rho(means);
    rep.increasing_trend = spearman_increasing_trend(means);
    const auto [min_it, max_it] = std::minmax_element(rep.rows.begin(), rep.rows.end(),
                                                     [](const MomentRow& a, const MomentRow& b) {
                                                         return a.moment < b.moment;
                                                     });
    // The band is anchored on the stderr of the *minimum*: a blown-up maximum
    // carries a standard error of its own magnitude, so including it would let
    // any instability hide inside its own noise.  The 25% relative allowance
    // absorbs the coarse-step discretization bias of the moment estimator,
    // which is systematic and does not shrink with the number of paths; an
    // unstable configuration overshoots by orders of magnitude, not percent.
    const double band = 3.0 * min_it->stderr_ + 0.25 * std::abs(min_it->moment);
    rep.max_within_band = max_it->moment <= min_it->moment + band;
    rep.bounded = !rep.increasing_trend && rep.max_within_band;
    return rep;
}

// ---------------------------------------------------------------------------
// artifacts
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

void write_report_csv(const std::string& path, const ConvergenceReport& report,
                      bool include_timings) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "scheme,M,rms,stderr,aborted";
    if (include_timings) out << ",seconds";
    out << "\n";
    for (const SchemeResult& r : report.results) {
        out << scheme_name(r.scheme) << ',' << r.resolution << ',' << fmt_double(r.rms) << ','
            << fmt_double(r.stderr_) << ',' << r.aborted;
        if (include_timings) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", r.seconds);
            out << ',' << buf;
        }
        out << "\n";
    }
}

void write_orders_csv(const std::string& path, const ConvergenceReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "scheme,slope,ci_lo,ci_hi\n";
    for (const SchemeOrder& o : report.orders)
        out << scheme_name(o.scheme) << ',' << fmt_double(o.fit.slope) << ','
            << fmt_double(o.fit.ci_lo) << ',' << fmt_double(o.fit.ci_hi) << "\n";
}

void write_manifest_json(const std::string& path, const StudyPlan& plan,
                         const std::vector<std::string>& artifacts) {
    nlohmann::json j;
    j["version"] = library_version;
    j["plan"]["problem"] = plan.problem;
    j["plan"]["params"] = plan.params;
    j["plan"]["modes"] = plan.modes;
    j["plan"]["horizon"] = plan.horizon;
    j["plan"]["resolutions"] = plan.resolutions;
    j["plan"]["ref_resolution"] = plan.ref_resolution;
    j["plan"]["paths"] = plan.paths;
    std::vector<std::string> names;
    for (Scheme s : plan.schemes) names.push_back(scheme_name(s));
    j["plan"]["schemes"] = names;
    j["plan"]["seed"] = plan.seed;
    j["plan"]["norm"] = norm_name(plan.norm);
    j["plan"]["exponents"] = {{"alpha", plan.exponents.alpha},
                              {"beta", plan.exponents.beta},
                              {"gamma", plan.exponents.gamma},
                              {"delta", plan.exponents.delta}};
    j["plan"]["threads"] = plan.threads;
    j["artifacts"] = artifacts;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

void write_convergence_svg(const std::string& path, const ConvergenceReport& report) {
    if (report.results.empty()) return;
    const double width = 640, height = 480, margin = 60;
    double min_m = 1e300, max_m = -1e300, min_r = 1e300, max_r = -1e300;
    for (const SchemeResult& r : report.results) {
        if (r.rms <= 0.0) continue;
        min_m = std::min(min_m, std::log2(double(r.resolution)));
        max_m = std::max(max_m, std::log2(double(r.resolution)));
        min_r = std::min(min_r, std::log2(r.rms));
        max_r = std::max(max_r, std::log2(r.rms));
    }
    if (max_m <= min_m) max_m = min_m + 1.0;
    if (max_r <= min_r) max_r = min_r + 1.0;
    auto px = [&](double lm) { return margin + (lm - min_m) / (max_m - min_m) * (width - 2 * margin); };
    auto py = [&](double lr) { return height - margin - (lr - min_r) / (max_r - min_r) * (height - 2 * margin); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
        << "\" text-anchor=\"middle\" font-size=\"14\">log2 M</text>\n";
    out << "<text x=\"18\" y=\"" << height / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 " << height / 2
        << ")\">log2 rms error</text>\n";

    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::map<std::string, std::vector<const SchemeResult*>> by_scheme;
    for (const SchemeResult& r : report.results) by_scheme[scheme_name(r.scheme)].push_back(&r);
    int ci = 0;
    for (const auto& [name, rows] : by_scheme) {
        const char* color = colors[ci % 4];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const SchemeResult* r : rows)
            if (r->rms > 0.0)
                out << px(std::log2(double(r->resolution))) << ',' << py(std::log2(r->rms)) << ' ';
        out << "\"/>\n";
        for (const SchemeResult* r : rows)
            if (r->rms > 0.0)
                out << "<circle cx=\"" << px(std::log2(double(r->resolution))) << "\" cy=\""
                    << py(std::log2(r->rms)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        out << "<text x=\"" << width - margin + 5 << "\" y=\"" << margin + 16 * ci
            << "\" font-size=\"12\" fill=\"" << color << "\">" << name << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

} // namespace spde
