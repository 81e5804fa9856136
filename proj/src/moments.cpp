#include "ngarch/moments.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ngarch/quadrature.hpp"

namespace ngarch {

namespace {

void require_valid_eta(double eta) {
    if (!(std::isfinite(eta) && eta > 0.0)) {
        throw std::invalid_argument("moment_functionals: eta must be positive and finite, got " +
                                    std::to_string(eta));
    }
}

void require_density(const Distribution& d, const char* role) {
    if (!d.has_density()) {
        throw std::invalid_argument(std::string("moment_functionals: ") + role + " '" + d.label() +
                                    "' has no closed-form density");
    }
}

MomentFunctionals finish(MomentFunctionals m) {
    if (std::abs(m.e_h2) < 1e-14) {
        throw std::runtime_error("moment_functionals: E h2 is numerically zero; "
                                 "the scale score is degenerate");
    }
    const double ratio = m.e_h1_sq / (m.e_h2 * m.e_h2);
    m.a_value = ratio;
    m.mu = m.e_eps4 / 4.0 - ratio;
    return m;
}

}  // namespace

MomentFunctionals moment_functionals(const Distribution& f, const Distribution& g,
                                     double eta) {
    require_valid_eta(eta);
    require_density(f, "likelihood");
    require_density(g, "innovation");
    if (g.family() == Family::student_t && g.shape() <= 4.0) {
        throw std::domain_error("moment_functionals: E eps^4 does not exist for " + g.label() +
                                " (tail index <= 4)");
    }

    MomentFunctionals m;
    if (f.family() == Family::gaussian) {
        // Every functional is a polynomial moment of g; assemble them from
        // E x^4 and the standardization identity E x^2 = 1 so that the
        // efficiency gap cancels exactly (not merely to quadrature tolerance)
        // when eta = 1.
        const double m4 = expect(g, [](double x) { return x * x * x * x; });
        const double e2 = eta * eta;
        m.e_h1_sq = (m4 - 2.0 * e2 + e2 * e2) / (e2 * e2);
        m.e_h2 = -2.0 / e2;
        m.e_eps4 = m4 - 1.0;
        m.e_h1_eps = -(m4 - 1.0) / e2;
    } else {
        // Integrands built from f's score have kinks wherever f does,
        // rescaled by eta.
        std::vector<double> breaks;
        for (double k : f.kinks()) breaks.push_back(eta * k);

        m.e_h1_sq = expect(g, [&](double x) {
            const double h1 = 1.0 + f.h(x / eta);
            return h1 * h1;
        }, 1e-7, breaks);
        m.e_h2 = expect(g, [&](double x) { return f.x_h_prime(x / eta); }, 1e-7, breaks);
        m.e_eps4 = expect(g, [&](double x) {
            const double d = x * x - 1.0;
            return d * d;
        });
        m.e_h1_eps = expect(g, [&](double x) {
            return (1.0 + f.h(x / eta)) * (x * x - 1.0);
        }, 1e-7, breaks);
    }
    m.fisher_gap = expect(g, [&](double x) {
        const double hg = g.h(x);
        return hg * hg;
    }, 1e-7, g.kinks()) - 1.0;
    return finish(m);
}

MomentFunctionals moment_functionals(const Distribution& f,
                                     const std::vector<double>& residuals, double eta) {
    require_valid_eta(eta);
    require_density(f, "likelihood");
    if (residuals.size() < 30) {
        throw std::invalid_argument("moment_functionals: need at least 30 residuals, got " +
                                    std::to_string(residuals.size()));
    }
    double s_h1_sq = 0.0, s_h2 = 0.0, s_eps4 = 0.0, s_h1_eps = 0.0;
    for (double r : residuals) {
        if (!std::isfinite(r)) {
            throw std::invalid_argument("moment_functionals: residuals contain a non-finite value");
        }
        const double z = r / eta;
        const double h1 = 1.0 + f.h(z);
        const double d = r * r - 1.0;
        s_h1_sq += h1 * h1;
        s_h2 += f.x_h_prime(z);
        s_eps4 += d * d;
        s_h1_eps += h1 * d;
    }
    const double n = static_cast<double>(residuals.size());
    MomentFunctionals m;
    m.e_h1_sq = s_h1_sq / n;
    m.e_h2 = s_h2 / n;
    m.e_eps4 = s_eps4 / n;
    m.e_h1_eps = s_h1_eps / n;
    return finish(m);
}

}  // namespace ngarch
