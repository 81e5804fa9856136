#pragma once

// GARCH(p,q) data-generating process in the scale/shape parameterization
//
//   x_t = sigma * v_t * eps_t,
//   v_t^2 = 1 + sum_i a_i x_{t-i}^2 + sum_j b_j v_{t-j}^2,
//
// plus conversion to the classical form (c, a~, b~) = (sigma^2, sigma^2 a, b),
// volatility filtering with analytic parameter gradients, and simulation.
//
// Presample convention: for t <= 0, v^2 is set to the stationary mean
// 1 / (1 - sigma^2 sum(a) - sum(b)) when that denominator exceeds 1e-6 and to
// sample-variance(returns) / sigma^2 otherwise; presample x^2 is
// sigma^2 * (that v^2). An explicit Presample override exists so that
// optimizers can freeze the presample across parameter values, making the
// filtered path (and hence likelihoods) smooth in the parameters. Gradients
// always treat the presample as a constant.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ngarch/distributions.hpp"

namespace ngarch {

struct GarchOrder {
    std::size_t p = 0;  // ARCH lags (coefficients on x_{t-i}^2)
    std::size_t q = 0;  // GARCH lags (coefficients on v_{t-j}^2)
};

struct GarchParams {
    double sigma = 1.0;     // volatility scale, > 0
    std::vector<double> a;  // p nonnegative ARCH coefficients
    std::vector<double> b;  // q nonnegative GARCH coefficients, sum <= 1 - 1e-6

    GarchOrder order() const { return {a.size(), b.size()}; }

    // Throws std::invalid_argument when any invariant fails:
    // sigma > 0, a_i >= 0, b_j >= 0, sum(b) <= 1 - 1e-6, p + q >= 1.
    void validate() const;
};

struct ClassicGarchParams {
    double c = 1.0;  // intercept sigma^2, > 0
    std::vector<double> a_tilde;
    std::vector<double> b_tilde;
};

// Volatility path and its parameter gradient for one series.
struct VolatilityPath {
    std::vector<double> v;   // v_t >= 1 for t = 0..T-1
    Eigen::MatrixXd grad;    // T x (p+q); row t is d v_t / d (a', b')
    double presample_value;  // v^2 used for t <= 0
};

// Presample override: the v^2 and x^2 values standing in for t <= 0.
struct Presample {
    double v2 = 1.0;
    double x2 = 0.0;
};

// The default presample for the given parameters and series (see header
// comment for the convention).
Presample default_presample(const GarchParams& params, const std::vector<double>& returns);

// Runs the volatility recursion over the series and accumulates the gradient
// recursions d v_t^2 / d a_i and d v_t^2 / d b_j with zero presample
// derivatives. Requires T >= p + q + 1 and finite returns.
VolatilityPath filter(const GarchParams& params, const std::vector<double>& returns);
VolatilityPath filter(const GarchParams& params, const std::vector<double>& returns,
                      const Presample& presample);

// Draws a length-T series from the model, discarding burn_in initial values.
// Deterministic for a fixed seed; extending T with the same seed keeps the
// common prefix.
std::vector<double> simulate(const GarchParams& params, const Distribution& innov,
                             std::size_t T, std::size_t burn_in, std::uint64_t seed);

// Parameterization change c = sigma^2, a~_i = sigma^2 a_i, b~_j = b_j and its
// inverse; round trips are identities up to rounding.
ClassicGarchParams to_classic(const GarchParams& params);
GarchParams from_classic(const ClassicGarchParams& params);

struct StationarityCheck {
    bool stationary;  // sigma^2 sum(a) + sum(b) < 1
    double margin;    // 1 - that sum
};

StationarityCheck covariance_stationary(const GarchParams& params);

}  // namespace ngarch
