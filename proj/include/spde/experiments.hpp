#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "spde/schemes.hpp"
#include "spde/stats.hpp"

namespace spde {

enum class ErrorNorm { H, HGamma };

std::string norm_name(ErrorNorm n);
ErrorNorm norm_from_name(const std::string& name);

/// Full description of a strong-convergence study. All coarse resolutions
/// are coupled to one fine increment stream at ref_resolution.
struct StudyPlan {
    std::string problem = "linear_mult";
    std::map<std::string, double> params;
    int modes = 32;
    double horizon = 1.0;
    std::vector<int> resolutions = {4, 8, 16, 32, 64};
    int ref_resolution = 1024;
    int paths = 200;
    std::vector<Scheme> schemes = {Scheme::ExpEuler, Scheme::ExpMilstein, Scheme::WagnerPlaten};
    std::uint64_t seed = 42;
    ErrorNorm norm = ErrorNorm::H;
    RegularityExponents exponents;
    int threads = 1;

    /// Throws on violated invariants (divisibility, ordering, path count,
    /// exponent chains).
    void validate() const;
};

/// The operator/noise/coefficients/initial-value bundle a plan resolves to.
struct Problem {
    OperatorSpec op;
    NoiseSpec noise;
    std::shared_ptr<const Coefficients> coeffs;
    SpectralVector initial;
    bool exact_reference = false; // scalar geometric case: closed-form solution
    double gbm_lambda = 0.0, gbm_sigma = 0.0, gbm_q = 0.0;
};

Problem build_problem(const StudyPlan& plan);

struct SchemeResult {
    Scheme scheme;
    int resolution = 0;
    double rms = 0.0;
    double stderr_ = 0.0;
    int aborted = 0;
    double seconds = 0.0;
};

struct SchemeOrder {
    Scheme scheme;
    OrderFit fit;
};

struct ConvergenceReport {
    std::vector<SchemeResult> results;
    std::vector<SchemeOrder> orders;
};

/// Runs the full coupled-path study: one fine stream per path, reference at
/// ref_resolution (closed form for the scalar geometric case), every
/// (scheme, M) evolved on aggregated increments, RMS errors at the terminal
/// time, and per-scheme order fits.
ConvergenceReport run_study(const StudyPlan& plan);

/// Terminal reference state for one path (proxy for the mild solution).
SpectralVector reference_solution(const StudyPlan& plan, int path_index);

/// RMS terminal error of one (scheme, M) configuration with its delta-method
/// standard error.
std::pair<double, double> strong_error(const StudyPlan& plan, Scheme scheme, int resolution);

struct MomentRow {
    int resolution = 0;
    double moment = 0.0; // estimate of E ||Y^M_M||^2 in the H_gamma norm
    double stderr_ = 0.0;
    int aborted = 0;
};

struct MomentReport {
    std::vector<MomentRow> rows;
    double spearman = 0.0;
    bool increasing_trend = false;
    bool max_within_band = false;
    bool bounded = false;
};

/// Second-moment table of the terminal state across the plan's resolutions,
/// with the boundedness verdict (no increasing Spearman trend at 5% and max
/// within 3 combined standard errors of min).
MomentReport moment_probe(const StudyPlan& plan, Scheme scheme = Scheme::WagnerPlaten);

// ---- report artifacts ----

void write_report_csv(const std::string& path, const ConvergenceReport& report,
                      bool include_timings = false);
void write_orders_csv(const std::string& path, const ConvergenceReport& report);
void write_manifest_json(const std::string& path, const StudyPlan& plan,
                         const std::vector<std::string>& artifacts);
void write_convergence_svg(const std::string& path, const ConvergenceReport& report);

extern const char* const library_version;

} // namespace spde
