#include "ngarch/garch.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ngarch/rng.hpp"

namespace ngarch {

namespace {

double mean_square(const std::vector<double>& x) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return s / static_cast<double>(x.size());
}

void check_returns(const std::vector<double>& returns, const GarchOrder& order) {
    if (returns.empty()) throw std::invalid_argument("returns series is empty");
    if (returns.size() < order.p + order.q + 1)
        throw std::invalid_argument("returns series shorter than p + q + 1");
    for (double r : returns)
        if (!std::isfinite(r)) throw std::invalid_argument("returns contain a non-finite value");
}

}  // namespace

void GarchParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("sigma must be positive and finite");
    if (a.empty() && b.empty()) throw std::invalid_argument("model order p + q must be >= 1");
    for (double ai : a)
        if (!(ai >= 0.0) || !std::isfinite(ai))
            throw std::invalid_argument("ARCH coefficients must be nonnegative and finite");
    double b_sum = 0.0;
    for (double bj : b) {
        if (!(bj >= 0.0) || !std::isfinite(bj))
            throw std::invalid_argument("GARCH coefficients must be nonnegative and finite");
        b_sum += bj;
    }
    if (b_sum > 1.0 - 1e-6)
        throw std::invalid_argument("sum of GARCH coefficients must be <= 1 - 1e-6");
}

Presample default_presample(const GarchParams& params, const std::vector<double>& returns) {
    const double a_sum = std::accumulate(params.a.begin(), params.a.end(), 0.0);
    const double b_sum = std::accumulate(params.b.begin(), params.b.end(), 0.0);
    const double s2 = params.sigma * params.sigma;
    const double denom = 1.0 - s2 * a_sum - b_sum;
    const double v2 = denom > 1e-6 ? 1.0 / denom : mean_square(returns) / s2;
    return Presample{v2, s2 * v2};
}

VolatilityPath filter(const GarchParams& params, const std::vector<double>& returns) {
    return filter(params, returns, default_presample(params, returns));
}

VolatilityPath filter(const GarchParams& params, const std::vector<double>& returns,
                      const Presample& presample) {
    params.validate();
    const auto order = params.order();
    check_returns(returns, order);
    if (!(presample.v2 > 0.0) || !(presample.x2 >= 0.0))
        throw std::invalid_argument("presample values must be positive");

    const std::size_t T = returns.size();
    const std::size_t p = order.p, q = order.q, np = p + q;

    VolatilityPath path;
    path.v.resize(T);
    path.grad.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(np));
    path.presample_value = presample.v2;

    std::vector<double> v2(T);
    // d v_t^2 / d (a', b'), row-major over t; presample rows are all zero.
    Eigen::MatrixXd dv2(T, np);

    for (std::size_t t = 0; t < T; ++t) {
        double val = 1.0;
        Eigen::RowVectorXd dval = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(np));
        for (std::size_t i = 1; i <= p; ++i) {
            const double x2 =
                t >= i ? returns[t - i] * returns[t - i] : presample.x2;
            val += params.a[i - 1] * x2;
            dval(static_cast<Eigen::Index>(i - 1)) += x2;
        }
        for (std::size_t j = 1; j <= q; ++j) {
            const double bj = params.b[j - 1];
            if (t >= j) {
                val += bj * v2[t - j];
                dval(static_cast<Eigen::Index>(p + j - 1)) += v2[t - j];
                dval += bj * dv2.row(static_cast<Eigen::Index>(t - j));
            } else {
                val += bj * presample.v2;
                dval(static_cast<Eigen::Index>(p + j - 1)) += presample.v2;
            }
        }
        if (val < 1.0) val = 1.0;  // recursion guarantees v^2 >= 1; absorb rounding
        v2[t] = val;
        dv2.row(static_cast<Eigen::Index>(t)) = dval;
        path.v[t] = std::sqrt(val);
        path.grad.row(static_cast<Eigen::Index>(t)) = dval / (2.0 * path.v[t]);
    }
    return path;
}

std::vector<double> simulate(const GarchParams& params, const Distribution& innov,
                             std::size_t T, std::size_t burn_in, std::uint64_t seed) {
    params.validate();
    if (T < 1) throw std::invalid_argument("T must be >= 1");
    const std::size_t p = params.a.size(), q = params.b.size();

    // The presample for simulation never depends on data, so the fallback
    // branch of the default convention does not arise; guard anyway.
    const double a_sum = std::accumulate(params.a.begin(), params.a.end(), 0.0);
    const double b_sum = std::accumulate(params.b.begin(), params.b.end(), 0.0);
    const double s2 = params.sigma * params.sigma;
    const double denom = 1.0 - s2 * a_sum - b_sum;
    const double v2_pre = denom > 1e-6 ? 1.0 / denom : 1.0;
    const double x2_pre = s2 * v2_pre;

    Rng rng(seed);
    const std::size_t total = burn_in + T;
    std::vector<double> x2_hist(p, x2_pre);  // ring buffers, newest at write index
    std::vector<double> v2_hist(q, v2_pre);
    std::size_t xi = 0, vi = 0;

    std::vector<double> out;
    out.reserve(T);
    for (std::size_t t = 0; t < total; ++t) {
        double v2 = 1.0;
        for (std::size_t i = 1; i <= p; ++i)
            v2 += params.a[i - 1] * x2_hist[(xi + p - i) % p];
        for (std::size_t j = 1; j <= q; ++j)
            v2 += params.b[j - 1] * v2_hist[(vi + q - j) % q];
        if (v2 < 1.0) v2 = 1.0;
        const double x = params.sigma * std::sqrt(v2) * innov.sample_one(rng);
        if (p > 0) {
            x2_hist[xi] = x * x;
            xi = (xi + 1) % p;
        }
        if (q > 0) {
            v2_hist[vi] = v2;
            vi = (vi + 1) % q;
        }
        if (t >= burn_in) out.push_back(x);
    }
    return out;
}

ClassicGarchParams to_classic(const GarchParams& params) {
    const double c = params.sigma * params.sigma;
    ClassicGarchParams out;
    out.c = c;
    out.a_tilde.reserve(params.a.size());
    for (double ai : params.a) out.a_tilde.push_back(c * ai);
    out.b_tilde = params.b;
    return out;
}

GarchParams from_classic(const ClassicGarchParams& params) {
    if (!(params.c > 0.0)) throw std::invalid_argument("classic intercept c must be positive");
    GarchParams out;
    out.sigma = std::sqrt(params.c);
    out.a.reserve(params.a_tilde.size());
    for (double ai : params.a_tilde) out.a.push_back(ai / params.c);
    out.b = params.b_tilde;
    return out;
}

StationarityCheck covariance_stationary(const GarchParams& params) {
    const double a_sum = std::accumulate(params.a.begin(), params.a.end(), 0.0);
    const double b_sum = std::accumulate(params.b.begin(), params.b.end(), 0.0);
    const double s = params.sigma * params.sigma * a_sum + b_sum;
    return {s < 1.0, 1.0 - s};
}

}  // namespace ngarch
