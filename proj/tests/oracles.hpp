#pragma once

// Closed-form moment oracles used across the test suites, written directly
// from gamma-function identities so they are independent of the library's
// quadrature and density code.

#include <cmath>

namespace oracles {

// E|X|^k for the standardized Student's t with nu > k degrees of freedom.
inline double t_abs_moment(double nu, double k) {
    return std::pow(nu - 2.0, 0.5 * k) *
           std::exp(std::lgamma(0.5 * (k + 1.0)) + std::lgamma(0.5 * (nu - k)) -
                    std::lgamma(0.5 * nu)) /
           std::sqrt(M_PI);
}

// E|X|^k for the standardized generalized Gaussian with shape beta.
inline double gg_abs_moment(double beta, double k) {
    const double alpha =
        std::exp(0.5 * (std::lgamma(1.0 / beta) - std::lgamma(3.0 / beta)));
    return std::pow(alpha, k) *
           std::exp(std::lgamma((k + 1.0) / beta) - std::lgamma(1.0 / beta));
}

// E|X|^k for the standard normal.
inline double normal_abs_moment(double k) {
    return std::pow(2.0, 0.5 * k) * std::exp(std::lgamma(0.5 * (k + 1.0))) /
           std::sqrt(M_PI);
}

// (Gamma(3/beta)/Gamma(1/beta))^{beta/2}, the coefficient in the generalized
// Gaussian score function.
inline double gg_k_beta(double beta) {
    return std::exp(0.5 * beta *
                    (std::lgamma(3.0 / beta) - std::lgamma(1.0 / beta)));
}

}  // namespace oracles
