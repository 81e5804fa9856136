#pragma once

// Dense BFGS minimizer with a strong-Wolfe line search (cubic-interpolation
// zoom, bisection safeguards, and an approximate-Wolfe acceptance rule for
// steps where the objective is flat to roundoff). Intended for the small,
// smooth, analytically-differentiated objectives used by the fitting layer.

#include <functional>

#include <Eigen/Dense>

namespace ngarch {

// fg(x, grad) returns the objective value and fills grad with its gradient.
using ObjectiveFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Minimizes fg starting from x0. Converged means the gradient 2-norm fell to
// grad_tol or below. Throws std::invalid_argument when the objective is not
// finite at x0.
OptimResult minimize_bfgs(const ObjectiveFn& fg, const Eigen::VectorXd& x0, double grad_tol,
                          int max_iterations);

}  // namespace ngarch
