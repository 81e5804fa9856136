#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngarch/distributions.hpp"

namespace ngarch {

struct QuadratureError : std::runtime_error {
    QuadratureError(const std::string& msg, double achieved_tolerance)
        : std::runtime_error(msg + " (achieved tolerance " +
                             std::to_string(achieved_tolerance) + ")"),
          achieved(achieved_tolerance) {}
    double achieved;
};

// E_g[phi(x)] by adaptive double-exponential quadrature with a
// family-specific change of variable:
//  - gaussian: two half-line integrals, so kinks of phi at 0 sit on an endpoint;
//  - student_t: x = sqrt(nu-2) u / sqrt(1-u^2) maps the real line to (-1,1)
//    and absorbs the polynomial tail exactly; split at u = 0;
//  - generalized_gaussian: t = (x/alpha)^beta turns each half-line into a
//    Gamma-weighted integral on (0, inf);
//  - skewed_t: piecewise t-substitution per skew side, split additionally at
//    x = 0 so kinks of phi stay on segment endpoints.
// Throws QuadratureError when the error estimate exceeds rel_tol against
// max(|value|, 0.01 * L1 mass).
//
// break_points lists x-values where phi is not smooth (score kinks of a
// second distribution, say). Zero is always a segment boundary already and
// is ignored; nonzero break points are honoured by the gaussian and skewed_t
// integrators and rejected (std::logic_error) by the student_t and
// generalized_gaussian ones, where no fitting likelihood produces them.
double expect(const Distribution& g, const std::function<double(double)>& phi,
              double rel_tol = 1e-7, const std::vector<double>& break_points = {});

}  // namespace ngarch
