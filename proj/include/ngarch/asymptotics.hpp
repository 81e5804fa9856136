#pragma once

// Asymptotic covariance machinery for the two-step estimator.
//
// With k_t = (1/sigma, y_t')' and y_t = (1/v_t) dv_t/dgamma, the limiting
// covariances of the (rescaled) estimators are built from M = E k k' and the
// scalar moment functionals of the likelihood/innovation pair:
//
//   Sigma_G   = (E(eps^2-1)^2 / 4) M^{-1}              gaussian QMLE
//   Sigma_1   = A M^{-1}                               known-scale estimator
//   Sigma_2   = A M^{-1} + sigma0^2 mu e1 e1'          two-step estimator
//   Sigma_eta = eta^2 (E(eps^2-1)^2/4 - c + A)          scale-correction, c = E h1(eps^2-1)/E h2
//   Pi        = (eta sigma0 / 2)(c - E(eps^2-1)^2/2) e1'  cross term with eta
//   Xi        = (c/2) M^{-1} - (sigma0^2/2)(c - E(eps^2-1)^2/2) e1 e1'
//                                                      cross term with the gaussian step
//
// M has the partitioned structure M = [[1/sigma0^2, ybar'/sigma0],
// [ybar/sigma0, E y y']], whose inverse has the closed form implemented by
// block_inverse; the production path uses a symmetric factorization instead
// and the two are cross-checked in tests.

#include <vector>

#include <Eigen/Dense>

#include "ngarch/distributions.hpp"
#include "ngarch/garch.hpp"
#include "ngarch/moments.hpp"

namespace ngarch {

struct KMatrixStats {
    Eigen::MatrixXd M;      // sample mean of k k'
    Eigen::VectorXd k_bar;  // sample mean of k
    Eigen::MatrixXd V;      // inverse of the sample variance of y
    Eigen::VectorXd y_bar;  // sample mean of y
};

// Sample second-moment statistics of the score carrier k_t along the fitted
// volatility path. Throws std::runtime_error naming the offending parameter
// when the variance of y is singular (e.g. a degenerate fit with all dynamic
// coefficients at zero).
KMatrixStats k_stats(const GarchParams& params, const std::vector<double>& returns);
KMatrixStats k_stats(const GarchParams& params, const std::vector<double>& returns,
                     const Presample& presample);

// Closed-form inverse of M from its partitioned structure.
Eigen::MatrixXd block_inverse(const KMatrixStats& stats);

struct CovarianceBlocks {
    Eigen::MatrixXd sigma_G;
    Eigen::MatrixXd sigma_1;
    Eigen::MatrixXd sigma_2;
    double sigma_eta = 0.0;
    Eigen::RowVectorXd pi;
    Eigen::MatrixXd xi;
};

CovarianceBlocks covariance_blocks(const KMatrixStats& stats, const MomentFunctionals& moments,
                                   double sigma0, double eta);

// Population functionals of a likelihood/innovation pair, evaluated at the
// population scale correction.
double mu(const Distribution& f, const Distribution& g);
double a_value(const Distribution& f, const Distribution& g);

// How far the two-step estimator sits from the exact-MLE benchmark:
// gamma_coefficient = A(f, g) - 1 / (E h_g^2 - 1) for the dynamic parameters,
// mu for the additional sigma^2 term. Both vanish at f = g.
struct MleGap {
    double gamma_coefficient = 0.0;
    double mu = 0.0;
};
MleGap mle_gap(const Distribution& f, const Distribution& g);

}  // namespace ngarch
