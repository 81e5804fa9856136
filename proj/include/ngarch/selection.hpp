#pragma once

// Adaptive likelihood choice and estimator aggregation.
//
// Likelihood choice scans a candidate grid of quasi-likelihoods and picks the
// one minimizing the estimated efficiency factor
//     A_hat(f) = mean(h1^2) / mean(h2)^2,   h1 = 1 + h_f(r/eta_hat_f),
// over the first-step residuals r, with eta_hat_f re-estimated per candidate.
// A_hat is the plug-in for the factor multiplying M^{-1} in the limiting
// covariance of the dynamics block, so the minimizer is the (empirically)
// most efficient candidate. Ties break toward the lighter-tailed candidate.
//
// Aggregation combines the two-step estimator theta_hat with the gaussian
// QMLE theta_tilde through the common weight
//     w* = E[kappa_G (kappa_G + kappa_2)] / E[(kappa_G + kappa_2)^2],
//     kappa_G = (1 - r^2)/2,  kappa_2 = h1 / mean(h2),
// evaluated on sample moments of the second-step residuals. The combined
// estimator w* theta_hat + (1 - w*) theta_tilde attains, coordinate by
// coordinate, the diagonal variance
//     Sigma*_ii = (Sigma2_ii SigmaG_ii - Xi_ii^2)
//                 / (Sigma2_ii + SigmaG_ii - 2 Xi_ii),
// which never exceeds either ingredient's variance.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ngarch/distributions.hpp"
#include "ngarch/estimators.hpp"

namespace ngarch {

struct CandidateGrid {
    std::vector<double> t_dofs;      // Student candidates, each > 2
    std::vector<double> gg_shapes;   // exponential-power candidates, each in (0, 1]
    bool include_gaussian = true;
    // Lifts the shape <= 1 cap on exponential-power candidates (heavier-than-
    // default grids for exploratory fitting; the default stays conservative
    // because shapes above 1 can lose the scan's tail-dominance guarantee).
    bool allow_shapes_above_one = false;

    // The standard scan: t {2.5, 3, 4, 5, 6, 7, 9, 11, 15, 20},
    // exponential power {0.4, 0.6, 0.8, 1.0}, plus the gaussian.
    static CandidateGrid default_grid();

    // Candidates ordered lightest-tailed first (gaussian, then exponential
    // power by decreasing shape, then Student by decreasing dof), so that a
    // strict-minimum scan breaks ties toward the lighter candidate.
    // Throws std::invalid_argument when an invariant fails.
    std::vector<Distribution> candidates() const;
};

struct CandidateScore {
    Distribution candidate;
    double eta = 0.0;
    double a_hat = 0.0;
    bool ok = false;
    std::string error;  // set when the candidate's evaluation failed
};

struct SelectionResult {
    Distribution chosen;
    std::vector<CandidateScore> table;  // in scan order, failures included
};

// Scan the grid over a residual sample. The scan depends on the residuals
// only through their empirical distribution: permuting the input changes
// nothing, bit for bit. Candidates whose scale correction or moments fail to
// evaluate are recorded in the table and skipped; if every candidate fails,
// throws std::runtime_error.
SelectionResult choose_likelihood(const std::vector<double>& residuals,
                                  const CandidateGrid& grid);

struct FourStepFit {
    TwoStepFit fit;
    SelectionResult selection;
};

// Gaussian QMLE, likelihood choice on its residuals, scale correction for
// the chosen likelihood, second-step fit: the fully adaptive pipeline.
// Stage failures are rethrown with the stage named.
FourStepFit four_step_fit(const std::vector<double>& returns, const GarchOrder& order,
                          const CandidateGrid& grid, const FitOptions& options = {});

struct AggregationResult {
    double w_star = 0.0;   // common weight on the two-step estimator
    bool clamped = false;  // true when w_star was pulled back into [-1, 2]
    GarchParams params;    // w* theta_hat + (1 - w*) theta_tilde
    Eigen::VectorXd weights;          // per-coordinate optimal weights (all equal w*)
    Eigen::VectorXd sigma_star_diag;  // combined per-coordinate variances
};

// Optimal combination of the two-step fit with its own first step. Requires
// both stages converged and enough residuals for the moment machinery; a
// degenerate weight denominator (below 1e-12) throws std::runtime_error --
// for the gaussian likelihood, where the two estimators coincide and the
// denominator vanishes identically, the weight is fixed at 1/2 instead.
AggregationResult aggregate(const TwoStepFit& two_step);

}  // namespace ngarch
