#pragma once

// The scale correction eta_f attached to a quasi-likelihood f and an
// innovation law: the maximizer of Q(eta) = -log(eta) + E log f(eps/eta),
// located as the unique root of the monotone function
// H(eta) = E[1 + h(eps/eta)]. Root-finding is used instead of maximizing Q
// directly because H is strictly increasing while Q need not be concave.
// Both a population version (expectation by quadrature over a known density)
// and an empirical version (sample mean over residuals) are provided.

#include <utility>
#include <vector>

#include "ngarch/distributions.hpp"

namespace ngarch {

struct EtaSolution {
    double eta = 1.0;               // the scale correction, > 0
    double q_value = 0.0;           // profile objective at the solution
    double h_mean_residual = 0.0;   // value of H at the solution, ~ 0
    std::pair<double, double> bracket{0.0, 0.0};  // bracket handed to the refiner
};

// Root of the population H under innovation law g. Throws std::runtime_error
// when no sign change is found after growing the initial bracket
// [1e-3, 1e3] geometrically (10x, six times per side): that indicates the
// (f, g) pair violates the tail-dominance requirement for a finite solution.
EtaSolution eta_population(const Distribution& f, const Distribution& g);

// Root of the sample H over estimated residuals. Requires at least 30
// finite residuals with positive sample variance. The solution scales
// exactly linearly with the residuals.
EtaSolution eta_empirical(const Distribution& f, const std::vector<double>& residuals);

// Q evaluated on a grid of eta values, population and empirical versions.
std::vector<double> q_profile(const Distribution& f, const Distribution& g,
                              const std::vector<double>& eta_grid);
std::vector<double> q_profile(const Distribution& f, const std::vector<double>& residuals,
                              const std::vector<double>& eta_grid);

}  // namespace ngarch
