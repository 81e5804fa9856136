#include "ngarch/optim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ngarch {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Probe {
    double alpha = 0.0;
    double f = kInf;
    double dphi = kInf;  // directional derivative g(x + alpha d) . d
    Eigen::VectorXd x;
    Eigen::VectorXd g;
};

class LineSearch {
  public:
    LineSearch(const ObjectiveFn& fg, const Eigen::VectorXd& x0, const Eigen::VectorXd& d,
               double f0, double dphi0)
        : fg_(fg), x0_(x0), d_(d), f0_(f0), dphi0_(dphi0) {}

    Probe at(double alpha) {
        Probe p;
        p.alpha = alpha;
        p.x = x0_ + alpha * d_;
        p.g.resize(x0_.size());
        p.f = fg_(p.x, p.g);
        if (!std::isfinite(p.f)) {
            p.f = kInf;
            p.dphi = kInf;
        } else {
            p.dphi = p.g.dot(d_);
            if (!std::isfinite(p.dphi)) p.dphi = kInf;
            if (best_.f > p.f) best_ = p;
        }
        return p;
    }

    bool sufficient_decrease(const Probe& p) const {
        return p.f <= f0_ + kArmijo * p.alpha * dphi0_;
    }
    bool curvature_ok(const Probe& p) const { return std::abs(p.dphi) <= -kCurvature * dphi0_; }
    // Approximate Wolfe: usable when the Armijo test is drowned by roundoff.
    bool approx_wolfe(const Probe& p) const {
        return p.f <= f0_ + 1e-10 * (1.0 + std::abs(f0_)) &&
               (2.0 * kArmijo - 1.0) * dphi0_ >= p.dphi && p.dphi >= kCurvature * dphi0_;
    }

    // Strong-Wolfe bracketing (Nocedal & Wright alg. 3.5). Returns a probe with
    // alpha > 0 on success; alpha == 0 signals failure.
    Probe run(double alpha_first) {
        Probe prev;
        prev.alpha = 0.0;
        prev.f = f0_;
        prev.dphi = dphi0_;
        double alpha = alpha_first;
        for (int i = 0; i < 20; ++i) {
            Probe cur = at(alpha);
            if (!std::isfinite(cur.f) || cur.f > f0_ + kArmijo * alpha * dphi0_ ||
                (i > 0 && cur.f >= prev.f)) {
                return zoom(prev, cur);
            }
            if (curvature_ok(cur)) return cur;
            if (cur.dphi >= 0.0) return zoom(cur, prev);
            prev = cur;
            alpha = std::min(2.5 * alpha, 1e8);
        }
        return fallback();
    }

  private:
    // Cubic minimizer of the interpolant through (a.alpha, a.f, a.dphi) and
    // (b.alpha, b.f, b.dphi); returns NaN when it is not usable.
    static double cubic(const Probe& a, const Probe& b) {
        if (!std::isfinite(a.f) || !std::isfinite(b.f) || !std::isfinite(a.dphi) ||
            !std::isfinite(b.dphi)) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        const double d1 = a.dphi + b.dphi - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
        const double disc = d1 * d1 - a.dphi * b.dphi;
        if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
        const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
        return b.alpha -
               (b.alpha - a.alpha) * (b.dphi + d2 - d1) / (b.dphi - a.dphi + 2.0 * d2);
    }

    Probe zoom(Probe lo, Probe hi) {
        for (int i = 0; i < 40; ++i) {
            const double width = std::abs(hi.alpha - lo.alpha);
            if (width < 1e-14 * std::max(1.0, std::abs(lo.alpha))) break;
            double alpha = cubic(lo, hi);
            const double left = std::min(lo.alpha, hi.alpha);
            const double right = std::max(lo.alpha, hi.alpha);
            const double margin = 0.1 * width;
            if (!std::isfinite(alpha) || alpha < left + margin || alpha > right - margin) {
                alpha = 0.5 * (left + right);
            }
            Probe cur = at(alpha);
            if (!std::isfinite(cur.f) || cur.f > f0_ + kArmijo * alpha * dphi0_ ||
                cur.f >= lo.f) {
                hi = cur;
            } else {
                if (curvature_ok(cur)) return cur;
                if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = cur;
            }
        }
        return fallback();
    }

    Probe fallback() {
        // Accept the best point seen if it qualifies under approximate Wolfe
        // or achieves a genuine decrease; otherwise report failure.
        if (best_.alpha > 0.0 && std::isfinite(best_.f) &&
            (approx_wolfe(best_) || best_.f < f0_ - 1e-12 * (1.0 + std::abs(f0_)))) {
            return best_;
        }
        Probe fail;
        fail.alpha = 0.0;
        return fail;
    }

    const ObjectiveFn& fg_;
    const Eigen::VectorXd& x0_;
    const Eigen::VectorXd& d_;
    double f0_;
    double dphi0_;
    Probe best_;
};

}  // namespace

OptimResult minimize_bfgs(const ObjectiveFn& fg, const Eigen::VectorXd& x0, double grad_tol,
                          int max_iterations) {
    const Eigen::Index n = x0.size();
    OptimResult res;
    res.x = x0;
    Eigen::VectorXd g(n);
    double f = fg(res.x, g);
    if (!std::isfinite(f) || !g.allFinite()) {
        throw std::invalid_argument("minimize_bfgs: objective is not finite at the start point");
    }
    res.value = f;
    res.gradient_norm = g.norm();
    if (res.gradient_norm <= grad_tol) {
        res.converged = true;
        return res;
    }

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    bool just_reset = true;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        Eigen::VectorXd d = -(H * g);
        double dphi0 = d.dot(g);
        if (!(dphi0 < 0.0) || !d.allFinite()) {
            H.setIdentity();
            d = -g;
            dphi0 = d.dot(g);
            just_reset = true;
        }

        const double alpha_first =
            (iter == 1) ? std::min(1.0, 1.0 / std::max(1e-8, g.template lpNorm<1>())) : 1.0;
        LineSearch search(fg, res.x, d, f, dphi0);
        Probe step = search.run(alpha_first);
        if (step.alpha == 0.0) {
            if (just_reset) break;  // flat along steepest descent too: give up
            H.setIdentity();
            just_reset = true;
            --iter;
            continue;
        }

        const Eigen::VectorXd s = step.x - res.x;
        const Eigen::VectorXd y = step.g - g;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::VectorXd Hy = H * y;
            H -= rho * (s * Hy.transpose() + Hy * s.transpose());
            H += rho * rho * (y.dot(Hy) + sy) * (s * s.transpose());
        }
        just_reset = false;

        res.x = step.x;
        f = step.f;
        g = step.g;
        res.value = f;
        res.gradient_norm = g.norm();
        res.iterations = iter;
        if (res.gradient_norm <= grad_tol) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

}  // namespace ngarch
