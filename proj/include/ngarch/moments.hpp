#pragma once

// The scalar moment functionals that drive every asymptotic variance
// formula, for a quasi-likelihood f evaluated against either a known
// innovation density (quadrature) or a residual sample (plug-in):
//
//   h1(e) = 1 + h(e/eta),   h2(e) = (e/eta) h'(e/eta),
//   e_h1_sq = E h1^2,       e_h2 = E h2,
//   e_eps4 = E(e^2 - 1)^2,  e_h1_eps = E h1 (e^2 - 1),
//   mu = e_eps4 / 4 - e_h1_sq / e_h2^2,
//   a_value = e_h1_sq / e_h2^2.
//
// Both paths share this formula layer, so reproducing the reference grids
// with the population path validates the plug-in path used on data.

#include <optional>
#include <vector>

#include "ngarch/distributions.hpp"

namespace ngarch {

struct MomentFunctionals {
    double e_h1_sq = 0.0;
    double e_h2 = 0.0;
    double e_eps4 = 0.0;
    double e_h1_eps = 0.0;
    double mu = 0.0;
    double a_value = 0.0;
    // E(h_g^2) - 1 for the innovation's own score; only available on the
    // population path.
    std::optional<double> fisher_gap;
};

// Population version. Throws std::domain_error when E eps^4 does not exist
// (student_t innovations with nu <= 4) and QuadratureError when an integral
// fails to converge.
MomentFunctionals moment_functionals(const Distribution& f, const Distribution& g,
                                     double eta);

// Plug-in version: expectations replaced by sample averages over residuals,
// with the estimated scale correction plugged in.
MomentFunctionals moment_functionals(const Distribution& f,
                                     const std::vector<double>& residuals, double eta);

}  // namespace ngarch
