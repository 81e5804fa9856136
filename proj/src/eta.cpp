#include "ngarch/eta.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "ngarch/quadrature.hpp"

namespace ngarch {

namespace {

void require_density(const Distribution& d, const char* role) {
    if (!d.has_density())
        throw std::invalid_argument(std::string(role) +
                                    " must have a closed-form density; " + d.label() +
                                    " does not");
}

// Shared bracketing + refinement on a monotone increasing H.
EtaSolution solve_root(const std::function<double(double)>& H,
                       const std::function<double(double)>& Q) {
    double lo = 1e-3, hi = 1e3;
    double h_lo = H(lo), h_hi = H(hi);
    for (int grow = 0; h_lo > 0.0 && grow < 6; ++grow) {
        lo /= 10.0;
        h_lo = H(lo);
    }
    for (int grow = 0; h_hi < 0.0 && grow < 6; ++grow) {
        hi *= 10.0;
        h_hi = H(hi);
    }
    if (h_lo > 0.0 || h_hi < 0.0)
        throw std::runtime_error(
            "no scale correction found: the likelihood/innovation pair admits no sign "
            "change of the score balance in [1e-9, 1e9] (tail-dominance violated)");

    const std::pair<double, double> bracket{lo, hi};
    auto stop = [](double a, double b) { return b - a < 1e-12 * std::fabs(b); };
    std::uintmax_t max_iter = 200;
    const auto r = boost::math::tools::toms748_solve(H, lo, hi, h_lo, h_hi, stop, max_iter);

    EtaSolution sol;
    sol.eta = 0.5 * (r.first + r.second);
    sol.h_mean_residual = H(sol.eta);
    sol.q_value = Q(sol.eta);
    sol.bracket = bracket;
    return sol;
}

}  // namespace

EtaSolution eta_population(const Distribution& f, const Distribution& g) {
    require_density(f, "quasi-likelihood");
    require_density(g, "innovation distribution");
    // Non-smooth points of x -> h(x / eta) sit at eta times the score kinks.
    auto breaks_at = [&](double eta) {
        auto ks = f.kinks();
        for (double& k : ks) k *= eta;
        return ks;
    };
    auto H = [&](double eta) {
        return expect(g, [&](double x) { return 1.0 + f.h(x / eta); }, 1e-7,
                      breaks_at(eta));
    };
    auto Q = [&](double eta) {
        return -std::log(eta) +
               expect(g, [&](double x) { return f.log_density(x / eta); }, 1e-7,
                      breaks_at(eta));
    };
    return solve_root(H, Q);
}

EtaSolution eta_empirical(const Distribution& f, const std::vector<double>& residuals) {
    require_density(f, "quasi-likelihood");
    if (residuals.size() < 30)
        throw std::invalid_argument("need at least 30 residuals to locate the scale correction");
    double mean = 0.0;
    for (double r : residuals) {
        if (!std::isfinite(r)) throw std::invalid_argument("residuals contain a non-finite value");
        mean += r;
    }
    mean /= static_cast<double>(residuals.size());
    double var = 0.0;
    for (double r : residuals) var += (r - mean) * (r - mean);
    var /= static_cast<double>(residuals.size());
    if (!(var > 0.0)) throw std::invalid_argument("residuals are degenerate (zero variance)");

    const double n = static_cast<double>(residuals.size());
    auto H = [&](double eta) {
        double s = 0.0;
        for (double r : residuals) s += 1.0 + f.h(r / eta);
        return s / n;
    };
    auto Q = [&](double eta) {
        double s = 0.0;
        for (double r : residuals) s += f.log_density(r / eta);
        return -std::log(eta) + s / n;
    };
    return solve_root(H, Q);
}

std::vector<double> q_profile(const Distribution& f, const Distribution& g,
                              const std::vector<double>& eta_grid) {
    require_density(f, "quasi-likelihood");
    require_density(g, "innovation distribution");
    std::vector<double> out;
    out.reserve(eta_grid.size());
    for (double eta : eta_grid) {
        if (!(eta > 0.0)) throw std::invalid_argument("eta grid values must be positive");
        auto breaks = f.kinks();
        for (double& k : breaks) k *= eta;
        out.push_back(-std::log(eta) +
                      expect(g, [&](double x) { return f.log_density(x / eta); }, 1e-7,
                             breaks));
    }
    return out;
}

std::vector<double> q_profile(const Distribution& f, const std::vector<double>& residuals,
                              const std::vector<double>& eta_grid) {
    require_density(f, "quasi-likelihood");
    if (residuals.empty()) throw std::invalid_argument("residuals are empty");
    std::vector<double> out;
    out.reserve(eta_grid.size());
    const double n = static_cast<double>(residuals.size());
    for (double eta : eta_grid) {
        if (!(eta > 0.0)) throw std::invalid_argument("eta grid values must be positive");
        double s = 0.0;
        for (double r : residuals) s += f.log_density(r / eta);
        out.push_back(-std::log(eta) + s / n);
    }
    return out;
}

}  // namespace ngarch
