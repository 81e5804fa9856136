#include "ngarch/distributions.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ngarch {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056;

double lg(double x) { return std::lgamma(x); }

std::string trim_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

Distribution::Distribution(Family f, double shape, double skew)
    : family_(f), shape_(shape), skew_(skew) {
    switch (family_) {
        case Family::gaussian:
            break;
        case Family::student_t: {
            if (!(shape_ > 2.0)) throw std::invalid_argument("student_t requires nu > 2");
            // c1_: log of the standardized-t normalizing constant.
            c1_ = lg((shape_ + 1.0) / 2.0) - lg(shape_ / 2.0) -
                  0.5 * std::log((shape_ - 2.0) * M_PI);
            break;
        }
        case Family::generalized_gaussian: {
            if (!(shape_ > 0.0)) throw std::invalid_argument("generalized_gaussian requires beta > 0");
            const double beta = shape_;
            // alpha: scale giving unit variance; k_beta: tail coefficient in
            // log f(x) = -k_beta |x|^beta + const.
            const double alpha = std::exp(0.5 * (lg(1.0 / beta) - lg(3.0 / beta)));
            c1_ = std::pow(alpha, -beta);  // k_beta
            c2_ = alpha;
            c3_ = std::log(beta / (2.0 * alpha)) - lg(1.0 / beta);  // log normalization
            break;
        }
        case Family::skewed_t: {
            if (!(shape_ > 2.0)) throw std::invalid_argument("skewed_t requires nu > 2");
            if (!(std::fabs(skew_) < 1.0)) throw std::invalid_argument("skewed_t requires |lambda| < 1");
            const double nu = shape_, lam = skew_;
            const double c = std::exp(lg((nu + 1.0) / 2.0) - lg(nu / 2.0) -
                                      0.5 * std::log(M_PI * (nu - 2.0)));
            c1_ = 4.0 * lam * c * (nu - 2.0) / (nu - 1.0);           // a
            c2_ = std::sqrt(1.0 + 3.0 * lam * lam - c1_ * c1_);      // b
            c3_ = std::log(c2_ * c);                                 // log(b*c)
            break;
        }
        case Family::transformed_stable: {
            if (!(shape_ > 1.0 && shape_ < 2.0))
                throw std::invalid_argument("transformed_stable requires 1 < alpha < 2");
            // Unit-variance rescale for sign(Z)|Z|^(alpha/3): the fractional
            // absolute moment E|Z|^r of a symmetric alpha-stable variate with
            // unit scale, at r = 2 alpha / 3.
            const double r = 2.0 * shape_ / 3.0;
            const double log_m = r * std::log(2.0) + lg((r + 1.0) / 2.0) +
                                 lg(1.0 - r / shape_) - lg(1.0 - r / 2.0) -
                                 0.5 * std::log(M_PI);
            c1_ = std::sqrt(std::exp(log_m));
            break;
        }
    }
}

Distribution Distribution::gaussian() { return Distribution(Family::gaussian, 0.0, 0.0); }
Distribution Distribution::student_t(double nu) { return Distribution(Family::student_t, nu, 0.0); }
Distribution Distribution::generalized_gaussian(double beta) {
    return Distribution(Family::generalized_gaussian, beta, 0.0);
}
Distribution Distribution::skewed_t(double nu, double lambda) {
    return Distribution(Family::skewed_t, nu, lambda);
}
Distribution Distribution::transformed_stable(double alpha) {
    return Distribution(Family::transformed_stable, alpha, 0.0);
}

double Distribution::log_density(double x) const {
    switch (family_) {
        case Family::gaussian:
            return -0.5 * x * x - kLogSqrt2Pi;
        case Family::student_t: {
            const double m = shape_ - 2.0;
            return c1_ - 0.5 * (shape_ + 1.0) * std::log1p(x * x / m);
        }
        case Family::generalized_gaussian:
            return c3_ - c1_ * std::pow(std::fabs(x), shape_);
        case Family::skewed_t: {
            const double m = shape_ - 2.0;
            const double s = (x > c1_ / c2_) ? (1.0 - skew_) : (1.0 + skew_);
            const double w = (c1_ - c2_ * x) / s;
            return c3_ - 0.5 * (shape_ + 1.0) * std::log1p(w * w / m);
        }
        case Family::transformed_stable:
            throw std::logic_error("transformed_stable has no closed-form density");
    }
    return 0.0;
}

double Distribution::density(double x) const { return std::exp(log_density(x)); }

double Distribution::h(double x) const {
    switch (family_) {
        case Family::gaussian:
            return -x * x;
        case Family::student_t: {
            const double m = shape_ - 2.0;
            return -(shape_ + 1.0) * x * x / (m + x * x);
        }
        case Family::generalized_gaussian:
            return -shape_ * c1_ * std::pow(std::fabs(x), shape_);
        case Family::skewed_t: {
            const double m = shape_ - 2.0;
            const double s = (x > c1_ / c2_) ? (1.0 - skew_) : (1.0 + skew_);
            const double bt = c2_ / s;
            const double w = (c1_ - c2_ * x) / s;
            return x * (shape_ + 1.0) * w * bt / (m + w * w);
        }
        case Family::transformed_stable:
            throw std::logic_error("transformed_stable has no likelihood machinery");
    }
    return 0.0;
}

double Distribution::h_prime(double x) const {
    switch (family_) {
        case Family::gaussian:
            return -2.0 * x;
        case Family::student_t: {
            const double m = shape_ - 2.0;
            const double d = m + x * x;
            return -2.0 * (shape_ + 1.0) * m * x / (d * d);
        }
        case Family::generalized_gaussian: {
            if (x == 0.0) return 0.0;
            const double beta = shape_;
            return -beta * beta * c1_ * std::pow(std::fabs(x), beta - 1.0) *
                   (x > 0.0 ? 1.0 : -1.0);
        }
        case Family::skewed_t: {
            const double m = shape_ - 2.0;
            const double s = (x > c1_ / c2_) ? (1.0 - skew_) : (1.0 + skew_);
            const double bt = c2_ / s;
            const double w = (c1_ - c2_ * x) / s;
            const double d = m + w * w;
            const double psi = (shape_ + 1.0) * w * bt / d;
            const double dpsi = -(shape_ + 1.0) * bt * bt * (m - w * w) / (d * d);
            return psi + x * dpsi;
        }
        case Family::transformed_stable:
            throw std::logic_error("transformed_stable has no likelihood machinery");
    }
    return 0.0;
}

double Distribution::x_h_prime(double x) const {
    switch (family_) {
        case Family::gaussian:
            return -2.0 * x * x;
        case Family::student_t: {
            const double m = shape_ - 2.0;
            const double d = m + x * x;
            return -2.0 * (shape_ + 1.0) * m * x * x / (d * d);
        }
        case Family::generalized_gaussian:
            return -shape_ * shape_ * c1_ * std::pow(std::fabs(x), shape_);
        case Family::skewed_t:
            return x * h_prime(x);
        case Family::transformed_stable:
            throw std::logic_error("transformed_stable has no likelihood machinery");
    }
    return 0.0;
}

double Distribution::sample_one(Rng& rng) const {
    switch (family_) {
        case Family::gaussian:
            return rng.normal();
        case Family::student_t: {
            const double z = rng.normal();
            const double g = rng.gamma(shape_ / 2.0);
            return z * std::sqrt((shape_ - 2.0) / (2.0 * g));
        }
        case Family::generalized_gaussian: {
            const double w = rng.gamma(1.0 / shape_);
            const double mag = c2_ * std::pow(w, 1.0 / shape_);
            return rng.uniform() < 0.5 ? -mag : mag;
        }
        case Family::skewed_t: {
            const double nu = shape_, lam = skew_;
            const double a = c1_, b = c2_;
            const double u = rng.uniform();
            boost::math::students_t_distribution<double> tdist(nu);
            const double scale = std::sqrt((nu - 2.0) / nu);
            double z;
            if (u < 0.5 * (1.0 - lam)) {
                z = ((1.0 - lam) * scale * boost::math::quantile(tdist, u / (1.0 - lam)) - a) / b;
            } else {
                const double q = (u - 0.5 * (1.0 - lam)) / (1.0 + lam) + 0.5;
                z = ((1.0 + lam) * scale * boost::math::quantile(tdist, q) - a) / b;
            }
            return -z;
        }
        case Family::transformed_stable: {
            const double alpha = shape_;
            const double u = M_PI * (rng.uniform() - 0.5);
            const double w = rng.exponential();
            const double z = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
                             std::pow(std::cos(u - alpha * u) / w, (1.0 - alpha) / alpha);
            const double t = std::copysign(std::pow(std::fabs(z), alpha / 3.0), z);
            return t / c1_;
        }
    }
    return 0.0;
}

std::vector<double> Distribution::sample(std::size_t n, std::uint64_t seed) const {
    Rng rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = sample_one(rng);
    return out;
}

std::vector<double> Distribution::kinks() const {
    switch (family_) {
        case Family::generalized_gaussian:
            if (shape_ != 2.0) return {0.0};
            return {};
        case Family::skewed_t:
            return {c1_ / c2_};  // a / b, where the piecewise scale switches
        default:
            return {};
    }
}

std::string Distribution::label() const {
    switch (family_) {
        case Family::gaussian:
            return "gaussian";
        case Family::student_t:
            return "t_" + trim_number(shape_);
        case Family::generalized_gaussian:
            return "gg_" + trim_number(shape_);
        case Family::skewed_t:
            return "skewed_t_" + trim_number(shape_) + "_" + trim_number(skew_);
        case Family::transformed_stable:
            return "stable_" + trim_number(shape_);
    }
    return "";
}

}  // namespace ngarch
