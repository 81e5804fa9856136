#pragma once

// Fitting layer: gaussian QMLE, the two-step estimator with a non-gaussian
// quasi-likelihood and estimated scale correction, and a known-scale variant.
//
// All fits maximize the average per-observation criterion
//     l_t(theta) = -log(sigma v_t) + log f(x_t / (eta sigma v_t))
// over sigma > 0, a_i >= 0, sum b_j < 1 via an unconstrained BFGS on
// log/softmax-transformed coordinates, with analytic gradients
//     d l_t / d theta = -k_t (1 + h(z_t)),   z_t = x_t / (eta sigma v_t),
//     k_t = (1/sigma, (1/v_t) dv_t/dgamma')'.
//
// The presample needed by the volatility recursion is frozen once per dataset
// (from the moment-matched default start) so that the analytic gradient is
// exact for the objective actually being optimized.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ngarch/asymptotics.hpp"
#include "ngarch/distributions.hpp"
#include "ngarch/eta.hpp"
#include "ngarch/garch.hpp"

namespace ngarch {

struct FitOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;
    std::optional<GarchParams> initial_params;
    int multistart = 3;  // number of starting points (warm start first, then defaults)
};

struct FitResult {
    GarchParams params;
    double loglik = 0.0;         // mean per-observation log-likelihood
    double gradient_norm = 0.0;  // transformed-coordinate gradient norm at the optimum
    bool converged = false;
    int iterations = 0;
    std::vector<double> residuals;  // x_t / (sigma v_t) along the fitted path
    Presample presample;            // frozen presample used by the fit
    bool at_boundary = false;       // some a_i or b_j ended up at (numerical) zero
};

struct TwoStepFit {
    FitResult gaussian;
    EtaSolution eta_hat;
    FitResult non_gaussian;
    Distribution likelihood;
    CovarianceBlocks covariance;
};

// Step one: gaussian QMLE.
FitResult fit_gaussian(const std::vector<double>& returns, const GarchOrder& order,
                       const FitOptions& options = {});

// Full two-step pipeline: gaussian QMLE, scale correction from its residuals,
// then the f-likelihood fit warm-started at the gaussian estimate, plus the
// plug-in covariance blocks. Stage failures are rethrown with the stage named.
TwoStepFit fit_two_step(const std::vector<double>& returns, const GarchOrder& order,
                        const Distribution& f, const FitOptions& options = {});

// Same, reusing an existing first-step fit (the selection pipeline uses this
// to avoid refitting the gaussian step per candidate).
TwoStepFit fit_two_step(const std::vector<double>& returns, const GarchOrder& order,
                        const Distribution& f, const FitResult& first_step,
                        const FitOptions& options = {});

// f-likelihood fit with a known scale correction (no first step). With
// eta = 1 this is the "unscaled" non-gaussian QMLE.
FitResult fit_oracle(const std::vector<double>& returns, const GarchOrder& order,
                     const Distribution& f, double eta, const FitOptions& options = {});

// Mean per-observation criterion at an arbitrary parameter point, with the
// presample frozen to the same data-driven anchor the fits use. When gradient
// is non-null it is filled with the analytic parameter-space gradient
// (d/d sigma, d/d a_1..p, d/d b_1..q). The gaussian QMLE criterion is the
// special case f = gaussian, eta = 1.
double fit_criterion(const std::vector<double>& returns, const Distribution& f, double eta,
                     const GarchParams& params, Eigen::VectorXd* gradient = nullptr);

// Per-observation scores of the three estimating equations, evaluated at the
// fitted values: rows are observations.
struct ScoreTriples {
    Eigen::MatrixXd s1;  // gaussian score at the first-step estimate
    Eigen::VectorXd s2;  // scale-correction score at (first step, eta_hat)
    Eigen::MatrixXd s3;  // f-likelihood score at the second-step estimate
};
ScoreTriples scores(const std::vector<double>& returns, const TwoStepFit& fit);

}  // namespace ngarch
