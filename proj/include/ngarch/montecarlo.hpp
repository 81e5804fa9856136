#pragma once

// Seeded, parallel replication engine for estimator comparisons.
//
// A run simulates `replications` independent series from one model, fits
// every configured estimator on the same series (paired design), and collects
// raw estimates, per-replication standardized estimates, summary statistics,
// and pairwise variance/MSE ratio tables.
//
// Reproducibility: replication r draws its path from a stream seeded by
// stream_seed(master_seed, r), results land in preallocated slots, and all
// reductions run in replication order after the workers join — so the report
// is bit-identical no matter how many threads execute it.
//
// Standardization uses each replication's own plug-in covariance:
//   gaussian          (E(e^2-1)^2/4) M^{-1}
//   two_step / four_step / the non-gaussian stage of aggregate: the two-step
//                     covariance (with the scale-correction variance for eta)
//   oracle / mle      A M^{-1}
//   aggregate         the combined per-coordinate diagonal
// A failed standardization (e.g. a boundary fit with a singular score
// variance) leaves NaNs but does not fail the replication; only estimates
// that could not be produced at all count as failures.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ngarch/distributions.hpp"
#include "ngarch/estimators.hpp"
#include "ngarch/garch.hpp"
#include "ngarch/selection.hpp"

namespace ngarch {

enum class EstimatorKind { gaussian, two_step, oracle, mle, four_step, aggregate };

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::gaussian;
    std::optional<Distribution> likelihood;  // two_step / oracle / aggregate
    std::optional<CandidateGrid> grid;       // four_step

    static EstimatorSpec gaussian();
    static EstimatorSpec two_step(const Distribution& f);
    // Known scale correction: eta_f is solved once from the population pair
    // (f, innovation); requires an innovation with a density.
    static EstimatorSpec oracle(const Distribution& f);
    // Maximum likelihood under the true innovation law (eta = 1); requires an
    // innovation with a density.
    static EstimatorSpec mle();
    static EstimatorSpec four_step(CandidateGrid grid = CandidateGrid::default_grid());
    // Two-step fit with f followed by the optimal combination with its own
    // gaussian first step.
    static EstimatorSpec aggregate(const Distribution& f);

    std::string label() const;  // unique per distinct spec, used to address results
};

struct McConfig {
    GarchParams true_params;
    Distribution innovation = Distribution::gaussian();
    std::size_t T = 1000;
    std::size_t replications = 100;
    std::vector<EstimatorSpec> estimators;
    std::uint64_t master_seed = 1;
    unsigned threads = 0;  // 0 = hardware concurrency
    std::size_t burn_in = 500;
    FitOptions fit_options;
};

struct ParamSummary {
    double mean = 0.0;
    double bias = 0.0;
    double variance = 0.0;
    double mse = 0.0;  // includes squared bias
    double median = 0.0;
};

struct EstimatorResults {
    std::string label;
    // replications x dim(sigma, a..., b...); rows of NaN for failed replications.
    Eigen::MatrixXd estimates;
    // replications x (dim + 1); the last column standardizes eta_hat against
    // the population scale correction. NaN where unavailable.
    Eigen::MatrixXd standardized;
    Eigen::VectorXd eta_hat;            // NaN for estimators without a scale step
    Eigen::VectorXd w_star;             // aggregation weight per replication (NaN otherwise)
    std::vector<std::string> chosen;    // four_step: selected likelihood label per replication
    double eta_target = 0.0;            // population eta used for the standardized column
    std::vector<char> converged;        // per replication
    // Per replication: some coefficient pinned at zero. Plug-in standard
    // errors are interior-only, so normality diagnostics should skip these.
    std::vector<char> at_boundary;
    std::vector<ParamSummary> summary;  // per parameter, over converged replications
    std::size_t failures = 0;
    std::vector<std::string> failure_reasons;  // distinct reasons, capped
};

struct McReport {
    std::vector<std::string> param_names;  // "sigma", "a1", ..., "b1", ...
    Eigen::VectorXd true_values;
    std::size_t T = 0;
    std::size_t replications = 0;
    std::uint64_t master_seed = 0;
    std::vector<EstimatorResults> estimators;
    std::vector<std::uint64_t> path_checksums;  // per replication (paired design witness)
};

// Runs the experiment. Per-replication estimator failures are recorded and
// never abort the run; configuration errors (invalid sizes, duplicate
// estimator labels, oracle/mle with a density-free innovation) throw
// std::invalid_argument.
McReport run(const McConfig& config);

struct RatioEntry {
    double variance_ratio = 0.0;
    double mse_ratio = 0.0;
    bool flagged = false;  // zero-variance denominator
};

struct RatioTable {
    std::string numerator;
    std::string denominator;
    std::vector<std::string> param_names;
    std::vector<RatioEntry> entries;
    std::size_t common_replications = 0;  // both estimators converged
};

// Pairwise variance and MSE ratios per parameter, computed over the
// replications where both estimators converged. Unknown labels throw.
RatioTable ratio_tables(const McReport& report, const std::string& numerator_label,
                        const std::string& denominator_label);

struct NormalitySummary {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ks_statistic = 0.0;  // sup-distance to the standard normal cdf
    std::size_t n = 0;          // finite values used
    bool degenerate = false;    // fewer than two distinct values
};

// Descriptive comparison of a standardized sample against N(0, 1); non-finite
// entries are dropped (and reflected in n). No verdict is baked in.
NormalitySummary normality_check(const std::vector<double>& values);

}  // namespace ngarch
