#include "ngarch/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ngarch/eta.hpp"
#include "ngarch/moments.hpp"

namespace ngarch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();


}  // namespace

CandidateGrid CandidateGrid::default_grid() {
    CandidateGrid grid;
    grid.t_dofs = {2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 9.0, 11.0, 15.0, 20.0};
    grid.gg_shapes = {0.4, 0.6, 0.8, 1.0};
    grid.include_gaussian = true;
    return grid;
}

std::vector<Distribution> CandidateGrid::candidates() const {
    if (t_dofs.empty() && gg_shapes.empty() && !include_gaussian)
        throw std::invalid_argument("candidate grid: empty candidate set");
    for (double nu : t_dofs)
        if (!(nu > 2.0) || !std::isfinite(nu))
            throw std::invalid_argument("candidate grid: t dof must exceed 2");
    for (double beta : gg_shapes) {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw std::invalid_argument("candidate grid: shape must be positive");
        if (beta > 1.0 && !allow_shapes_above_one)
            throw std::invalid_argument(
                "candidate grid: shape above 1 requires allow_shapes_above_one");
    }
    std::vector<Distribution> out;
    if (include_gaussian) out.push_back(Distribution::gaussian());
    auto shapes = gg_shapes;
    std::sort(shapes.begin(), shapes.end(), std::greater<>());
    shapes.erase(std::unique(shapes.begin(), shapes.end()), shapes.end());
    for (double beta : shapes) out.push_back(Distribution::generalized_gaussian(beta));
    auto dofs = t_dofs;
    std::sort(dofs.begin(), dofs.end(), std::greater<>());
    dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
    for (double nu : dofs) out.push_back(Distribution::student_t(nu));
    return out;
}

SelectionResult choose_likelihood(const std::vector<double>& residuals,
                                  const CandidateGrid& grid) {
    const auto candidates = grid.candidates();
    // Sorting first makes every sample average independent of input order,
    // so the scan is a function of the empirical distribution alone.
    std::vector<double> sorted = residuals;
    std::sort(sorted.begin(), sorted.end());

    SelectionResult result{candidates.front(), {}};
    result.table.reserve(candidates.size());
    bool have_best = false;
    double best_a = kNaN;
    std::string last_error = "no candidates";
    for (const auto& f : candidates) {
        CandidateScore score{f, kNaN, kNaN, false, ""};
        try {
            const auto sol = eta_empirical(f, sorted);
            const auto mf = moment_functionals(f, sorted, sol.eta);
            score.eta = sol.eta;
            score.a_hat = mf.a_value;
            score.ok = std::isfinite(mf.a_value);
            if (!score.ok) score.error = "efficiency factor not finite";
        } catch (const std::exception& e) {
            score.error = e.what();
        }
        if (!score.ok) last_error = score.error;
        if (score.ok && (!have_best || score.a_hat < best_a)) {
            have_best = true;
            best_a = score.a_hat;
            result.chosen = f;
        }
        result.table.push_back(std::move(score));
    }
    if (!have_best)
        throw std::runtime_error("likelihood selection: every candidate failed; last error: " +
                                 last_error);
    return result;
}

FourStepFit four_step_fit(const std::vector<double>& returns, const GarchOrder& order,
                          const CandidateGrid& grid, const FitOptions& options) {
    FitResult first;
    try {
        first = fit_gaussian(returns, order, options);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("four-step fit, first step: ") + e.what());
    }
    SelectionResult selection = [&] {
        try {
            return choose_likelihood(first.residuals, grid);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("four-step fit, selection: ") + e.what());
        }
    }();
    // The remaining two steps carry their own stage tags.
    TwoStepFit fit = fit_two_step(returns, order, selection.chosen, first, options);
    return {std::move(fit), std::move(selection)};
}

AggregationResult aggregate(const TwoStepFit& two_step) {
    if (!two_step.gaussian.converged || !two_step.non_gaussian.converged)
        throw std::invalid_argument("aggregate: both fit stages must have converged");
    const auto& r = two_step.non_gaussian.residuals;
    if (r.size() < 30)
        throw std::invalid_argument("aggregate: needs at least 30 residuals");

    const auto& theta_hat = two_step.non_gaussian.params;    // two-step estimate
    const auto& theta_tilde = two_step.gaussian.params;      // gaussian estimate
    const auto dim = static_cast<Eigen::Index>(1 + theta_hat.a.size() + theta_hat.b.size());

    AggregationResult out;
    out.weights = Eigen::VectorXd::Zero(dim);
    out.sigma_star_diag = Eigen::VectorXd::Zero(dim);

    const bool gaussian_f = two_step.likelihood.family() == Family::gaussian;
    if (gaussian_f) {
        // kappa_2 = -kappa_G identically: the estimators coincide and any
        // weight returns the same point. Fix 1/2 by convention.
        out.w_star = 0.5;
        out.weights.setConstant(0.5);
        out.sigma_star_diag = two_step.covariance.sigma_G.diagonal();
    } else {
        const double eta = two_step.eta_hat.eta;
        const auto& f = two_step.likelihood;
        const auto n = static_cast<double>(r.size());
        double sum_h2 = 0.0;
        for (double x : r) sum_h2 += f.x_h_prime(x / eta);
        const double mean_h2 = sum_h2 / n;
        if (std::abs(mean_h2) < 1e-14)
            throw std::runtime_error("aggregate: score-derivative moment vanished");
        double num = 0.0, den = 0.0;
        for (double x : r) {
            const double kappa_g = 0.5 * (1.0 - x * x);
            const double kappa_2 = (1.0 + f.h(x / eta)) / mean_h2;
            const double s = kappa_g + kappa_2;
            num += kappa_g * s;
            den += s * s;
        }
        num /= n;
        den /= n;
        if (den < 1e-12)
            throw std::runtime_error("aggregate: degenerate weight denominator");
        out.w_star = num / den;
        if (out.w_star < -1.0 || out.w_star > 2.0) {
            out.w_star = std::clamp(out.w_star, -1.0, 2.0);
            out.clamped = true;
        }
        // Per-coordinate optimal weights and combined variances from the
        // stored covariance diagonals; on the same sample moments the
        // weights all collapse to w*.
        const auto& cov = two_step.covariance;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double s2 = cov.sigma_2(i, i);
            const double sg = cov.sigma_G(i, i);
            const double xi = cov.xi(i, i);
            const double d = s2 + sg - 2.0 * xi;
            const double scale = std::max({std::abs(s2), std::abs(sg), std::abs(xi), 1e-300});
            if (d <= 1e-12 * scale) {
                out.weights(i) = out.w_star;  // degenerate coordinate: estimators agree
                out.sigma_star_diag(i) = std::min(s2, sg);
            } else {
                out.weights(i) = (sg - xi) / d;
                out.sigma_star_diag(i) = (s2 * sg - xi * xi) / d;
            }
        }
    }

    const double w = out.w_star;
    GarchParams combined;
    combined.sigma = std::max(w * theta_hat.sigma + (1.0 - w) * theta_tilde.sigma, 1e-12);
    combined.a.resize(theta_hat.a.size());
    combined.b.resize(theta_hat.b.size());
    for (std::size_t i = 0; i < combined.a.size(); ++i)
        combined.a[i] = std::max(w * theta_hat.a[i] + (1.0 - w) * theta_tilde.a[i], 0.0);
    for (std::size_t j = 0; j < combined.b.size(); ++j)
        combined.b[j] = std::max(w * theta_hat.b[j] + (1.0 - w) * theta_tilde.b[j], 0.0);
    out.params = std::move(combined);
    return out;
}

}  // namespace ngarch
