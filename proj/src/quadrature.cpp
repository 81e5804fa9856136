#include "ngarch/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <vector>

namespace ngarch {

namespace {

struct Accum {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;

    void add(double v, double e, double m) {
        value += v;
        error += e;
        l1 += m;
    }
};

// Boost reports the absolute difference between the last two refinement
// levels through the error out-parameter; accumulate it as-is. The functor
// takes (u, sc) where sc is the signed distance to the nearest bound
// (positive near b, negative near a); reconstructing 1 - u^2 from sc keeps
// full precision arbitrarily close to the endpoints, which the
// near-divergent cases (heavy student_t with polynomial phi) need.
template <typename F>
void integrate_tanh_sinh(Accum& acc, const F& f, long double a, long double b) {
    boost::math::quadrature::tanh_sinh<long double> integrator;
    long double err = 0.0L, l1 = 0.0L;
    long double v = integrator.integrate(f, a, b, 1e-10L, &err, &l1);
    acc.add(static_cast<double>(v), static_cast<double>(err), static_cast<double>(l1));
}

// Contributions from 1 - u^2 below this cut are dropped: the integrands all
// decay at least like (1 - u^2)^{1/4} in the remaining tail, so the omitted
// mass is under 1e-12, while the cut keeps |x| <= sqrt(m) * 1e24 and fourth
// powers of x finite in double.
constexpr long double kOneMinusU2Floor = 1e-48L;

template <typename F>
void integrate_exp_sinh(Accum& acc, const F& f) {
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0, l1 = 0.0;
    double v = integrator.integrate(f, 1e-9, &err, &l1);
    acc.add(v, err, l1);
}

// Sorts, deduplicates (1e-12 spacing), and returns the given interior cut
// points together with any defaults the family needs.
std::vector<double> merge_cuts(std::vector<double> cuts, const std::vector<double>& extra) {
    for (double b : extra) {
        if (!std::isfinite(b)) throw std::logic_error("break points must be finite");
        cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return b - a < 1e-12; }),
               cuts.end());
    return cuts;
}

void reject_nonzero_cuts(const std::vector<double>& breaks, const char* family) {
    for (double b : breaks)
        if (std::fabs(b) >= 1e-12)
            throw std::logic_error(std::string("interior break points are not supported "
                                               "under the ") +
                                   family + " integrator");
}

void expect_gaussian(Accum& acc, const std::function<double(double)>& phi,
                     const std::vector<double>& breaks) {
    const double c = 1.0 / std::sqrt(2.0 * M_PI);
    // Beyond |x| = 39 the weight underflows; cut before phi can overflow against it.
    auto w = [&](double x) {
        return std::fabs(x) > 39.0 ? 0.0 : phi(x) * c * std::exp(-0.5 * x * x);
    };
    const auto cuts = merge_cuts({0.0}, breaks);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto seg = [&](long double u, long double) -> long double {
            return w(static_cast<double>(u));
        };
        integrate_tanh_sinh(acc, seg, cuts[i], cuts[i + 1]);
    }
    const double lo = cuts.front(), hi = cuts.back();
    integrate_exp_sinh(acc, [&](double s) { return w(hi + s); });
    integrate_exp_sinh(acc, [&](double s) { return w(lo - s); });
}

// student_t: substitute x = sqrt(m) u / sqrt(1 - u^2), mapping the real line
// to u in (-1, 1); the density becomes c sqrt(m) (1 - u^2)^{(nu - 2)/2}. On
// (-1, 1) the signed endpoint distance sc satisfies 1 - u^2 = |sc| (2 - |sc|)
// exactly, for every abscissa.
void expect_student_t(Accum& acc, double nu, const std::function<double(double)>& phi,
                      const std::vector<double>& breaks) {
    reject_nonzero_cuts(breaks, "student_t");
    const long double m = static_cast<long double>(nu) - 2.0L;
    const long double root_m = sqrtl(m);
    const long double logc = lgammal((nu + 1.0L) / 2.0L) - lgammal(nu / 2.0L) -
                             0.5L * logl(m * M_PI);
    const long double scale = expl(logc) * root_m;
    const long double half_pow = 0.5L * (nu - 2.0L);
    // Split at 0 so integrands with a cusp there (fractional |x|^k) still
    // converge; each half has exactly one singular end at u = -1 or u = +1.
    auto make_half = [&](bool lower_is_m_one) {
        return [&, lower_is_m_one](long double u, long double sc) -> long double {
            long double one_m;
            if (sc < 0.0L && lower_is_m_one)
                one_m = (-sc) * (2.0L + sc);
            else if (sc > 0.0L && !lower_is_m_one)
                one_m = sc * (2.0L - sc);
            else
                one_m = (1.0L - u) * (1.0L + u);
            if (one_m < kOneMinusU2Floor) return 0.0L;
            const double x = static_cast<double>(root_m * u / sqrtl(one_m));
            return scale * phi(x) * powl(one_m, half_pow);
        };
    };
    integrate_tanh_sinh(acc, make_half(true), -1.0L, 0.0L);
    integrate_tanh_sinh(acc, make_half(false), 0.0L, 1.0L);
}

void expect_gen_gaussian(Accum& acc, double beta, double alpha,
                         const std::function<double(double)>& phi,
                         const std::vector<double>& breaks) {
    reject_nonzero_cuts(breaks, "generalized_gaussian");
    const double inv_b = 1.0 / beta;
    const double norm = 0.5 * std::exp(-std::lgamma(inv_b));
    auto f = [&](double t) {
        if (t > 745.0) return 0.0;  // exp(-t) underflows past here
        const double x = alpha * std::pow(t, inv_b);
        return norm * (phi(x) + phi(-x)) * std::pow(t, inv_b - 1.0) * std::exp(-t);
    };
    integrate_exp_sinh(acc, f);
}

void expect_skewed_t(Accum& acc, const Distribution& g,
                     const std::function<double(double)>& phi,
                     const std::vector<double>& breaks) {
    const double nu = g.shape(), lam = g.skew();
    const double a = g.skew_a(), b = g.skew_b();
    const double m = nu - 2.0;
    const double root_m = std::sqrt(m);
    const double c = std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                              0.5 * std::log(M_PI * m));
    const double kink = a / b;

    const auto cuts = merge_cuts({0.0, kink}, breaks);

    auto u_of_x = [&](double x, double side) {
        const double w = (a - b * x) / side;
        return w / std::sqrt(m + w * w);
    };
    // One segment (x_lo, x_hi) not crossing the density kink; x decreasing in
    // u. Only the u = +/-1 ends (infinite x) are singular; there 1 - u^2 is
    // rebuilt from the endpoint distance sc, exact throughout that half.
    auto segment = [&](double x_lo, double x_hi) {
        const double mid_ref = std::isinf(x_lo) ? x_hi - 1.0
                             : std::isinf(x_hi) ? x_lo + 1.0
                                                : 0.5 * (x_lo + x_hi);
        const double side = (mid_ref > kink) ? (1.0 - lam) : (1.0 + lam);
        const bool upper_is_one = std::isinf(x_lo);
        const bool lower_is_m_one = std::isinf(x_hi);
        const double u_hi = upper_is_one ? 1.0 : u_of_x(x_lo, side);
        const double u_lo = lower_is_m_one ? -1.0 : u_of_x(x_hi, side);
        const long double scale = static_cast<long double>(c) * side * root_m;
        const long double rm = root_m, half_pow = 0.5L * (nu - 2.0L);
        auto f = [&, scale, rm, half_pow](long double u, long double sc) -> long double {
            long double one_m;
            if (sc > 0.0L && upper_is_one)
                one_m = sc * (2.0L - sc);
            else if (sc < 0.0L && lower_is_m_one)
                one_m = (-sc) * (2.0L + sc);
            else
                one_m = (1.0L - u) * (1.0L + u);
            if (one_m < kOneMinusU2Floor) return 0.0L;
            const double w = static_cast<double>(rm * u / sqrtl(one_m));
            const double x = (a - side * w) / b;
            return scale * phi(x) * powl(one_m, half_pow);
        };
        integrate_tanh_sinh(acc, f, u_lo, u_hi);
    };

    const double inf = std::numeric_limits<double>::infinity();
    segment(-inf, cuts.front());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) segment(cuts[i], cuts[i + 1]);
    segment(cuts.back(), inf);
}

}  // namespace

double expect(const Distribution& g, const std::function<double(double)>& phi,
              double rel_tol, const std::vector<double>& break_points) {
    Accum acc;
    try {
        switch (g.family()) {
            case Family::gaussian:
                expect_gaussian(acc, phi, break_points);
                break;
            case Family::student_t:
                expect_student_t(acc, g.shape(), phi, break_points);
                break;
            case Family::generalized_gaussian:
                expect_gen_gaussian(acc, g.shape(), g.gg_scale(), phi, break_points);
                break;
            case Family::skewed_t:
                expect_skewed_t(acc, g, phi, break_points);
                break;
            case Family::transformed_stable:
                throw std::logic_error("transformed_stable has no density for quadrature");
        }
    } catch (const std::logic_error&) {
        throw;
    } catch (const std::exception& e) {
        throw QuadratureError(std::string("quadrature failed: ") + e.what(), 1.0);
    }
    if (!std::isfinite(acc.value)) {
        throw QuadratureError("quadrature diverged under " + g.label(), 1.0);
    }
    const double denom = std::max({std::fabs(acc.value), 0.01 * acc.l1, 1e-300});
    const double achieved = acc.error / denom;
    if (achieved > rel_tol) {
        throw QuadratureError("quadrature under " + g.label() + " did not converge", achieved);
    }
    return acc.value;
}

}  // namespace ngarch
