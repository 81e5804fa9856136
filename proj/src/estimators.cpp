#include "ngarch/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ngarch/optim.hpp"

namespace ngarch {

namespace {

// Unconstrained coordinates: sigma = exp(u0), a_i = exp(u_i), and the GARCH
// coefficients through a capped softmax b_j = C exp(u_j) / (1 + sum exp(u)),
// which enforces sum b < 1 strictly.
struct Transform {
    size_t p = 0;
    size_t q = 0;
    static constexpr double kBCap = 1.0 - 1e-6;

    Eigen::Index dim() const { return static_cast<Eigen::Index>(1 + p + q); }

    GarchParams to_params(const Eigen::VectorXd& u) const {
        GarchParams gp;
        gp.sigma = std::exp(u(0));
        gp.a.resize(p);
        for (size_t i = 0; i < p; ++i) gp.a[i] = std::exp(u(1 + static_cast<Eigen::Index>(i)));
        gp.b.resize(q);
        if (q > 0) {
            double s = 0.0;
            for (size_t j = 0; j < q; ++j) s += std::exp(u(1 + static_cast<Eigen::Index>(p + j)));
            for (size_t j = 0; j < q; ++j) {
                gp.b[j] = kBCap * std::exp(u(1 + static_cast<Eigen::Index>(p + j))) / (1.0 + s);
            }
        }
        return gp;
    }

    Eigen::VectorXd from_params(const GarchParams& gp) const {
        Eigen::VectorXd u(dim());
        u(0) = std::log(std::max(gp.sigma, 1e-300));
        for (size_t i = 0; i < p; ++i) {
            u(1 + static_cast<Eigen::Index>(i)) = std::log(std::max(gp.a[i], 1e-12));
        }
        if (q > 0) {
            double st = 0.0;
            for (size_t j = 0; j < q; ++j) st += std::max(gp.b[j], 1e-12) / kBCap;
            const double rest = std::max(1.0 - st, 1e-12);
            for (size_t j = 0; j < q; ++j) {
                u(1 + static_cast<Eigen::Index>(p + j)) =
                    std::log(std::max(gp.b[j], 1e-12) / kBCap) - std::log(rest);
            }
        }
        return u;
    }

    // Pull a parameter-space gradient back to the unconstrained coordinates.
    Eigen::VectorXd chain(const Eigen::VectorXd& g_theta, const GarchParams& gp) const {
        Eigen::VectorXd gu(dim());
        gu(0) = g_theta(0) * gp.sigma;
        for (size_t i = 0; i < p; ++i) {
            const Eigen::Index k = 1 + static_cast<Eigen::Index>(i);
            gu(k) = g_theta(k) * gp.a[i];
        }
        for (size_t j = 0; j < q; ++j) {
            double acc = 0.0;
            for (size_t k = 0; k < q; ++k) {
                const double jac =
                    gp.b[k] * ((k == j ? 1.0 : 0.0) - gp.b[j] / kBCap);
                acc += g_theta(1 + static_cast<Eigen::Index>(p + k)) * jac;
            }
            gu(1 + static_cast<Eigen::Index>(p + j)) = acc;
        }
        return gu;
    }
};

// Negative mean log-likelihood and its analytic gradient in the transformed
// coordinates, with the presample held fixed.
struct Criterion {
    const std::vector<double>& x;
    const Distribution& f;
    double eta;
    Presample presample;
    Transform tf;

    double operator()(const Eigen::VectorXd& u, Eigen::VectorXd& gu) const {
        const GarchParams gp = tf.to_params(u);
        const auto path = filter(gp, x, presample);
        const size_t T = x.size();
        const Eigen::Index npq = static_cast<Eigen::Index>(tf.p + tf.q);

        double sum = 0.0;
        Eigen::VectorXd g_theta = Eigen::VectorXd::Zero(tf.dim());
        for (size_t t = 0; t < T; ++t) {
            const double v = path.v[t];
            const double sv = gp.sigma * v;
            const double z = x[t] / (eta * sv);
            sum += -std::log(sv) + f.log_density(z);
            const double w = 1.0 + f.h(z);
            g_theta(0) -= w / gp.sigma;
            g_theta.tail(npq) -=
                (w / v) * path.grad.row(static_cast<Eigen::Index>(t)).transpose();
        }
        const double inv_t = 1.0 / static_cast<double>(T);
        g_theta *= inv_t;
        gu = -tf.chain(g_theta, gp);
        return -sum * inv_t;
    }
};

double mean_square(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s / static_cast<double>(x.size());
}

GarchParams default_start(const GarchOrder& order, double m_hat) {
    const double sum_a_tilde = order.p > 0 ? 0.05 : 0.0;
    const double sum_b_tilde = order.q > 0 ? 0.8 : 0.0;
    const double c = m_hat * (1.0 - sum_a_tilde - sum_b_tilde);
    GarchParams gp;
    gp.sigma = std::sqrt(c);
    gp.a.assign(order.p, order.p > 0 ? (sum_a_tilde / static_cast<double>(order.p)) / c : 0.0);
    gp.b.assign(order.q, order.q > 0 ? sum_b_tilde / static_cast<double>(order.q) : 0.0);
    return gp;
}

GarchParams scaled(const GarchParams& gp, double fs, double fa, double fb) {
    GarchParams out = gp;
    out.sigma *= fs;
    for (auto& a : out.a) a *= fa;
    double sum_b = 0.0;
    for (auto& b : out.b) {
        b *= fb;
        sum_b += b;
    }
    if (sum_b >= Transform::kBCap) {
        const double shrink = (Transform::kBCap * 0.99) / sum_b;
        for (auto& b : out.b) b *= shrink;
    }
    return out;
}

void validate_inputs(const std::vector<double>& x, const GarchOrder& order,
                     const FitOptions& options) {
    if (order.p + order.q < 1) {
        throw std::invalid_argument("fit: model order must have p + q >= 1");
    }
    const size_t min_t = 10 * (1 + order.p + order.q);
    if (x.size() <= min_t) {
        throw std::invalid_argument("fit: need more than " + std::to_string(min_t) +
                                    " observations for order (" + std::to_string(order.p) + "," +
                                    std::to_string(order.q) + "), got " +
                                    std::to_string(x.size()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("fit: returns contain a non-finite value");
    }
    if (options.multistart < 1) throw std::invalid_argument("fit: multistart must be >= 1");
    if (options.max_iterations < 1) throw std::invalid_argument("fit: max_iterations must be >= 1");
    if (!(options.gradient_tolerance > 0.0)) {
        throw std::invalid_argument("fit: gradient_tolerance must be positive");
    }
}

FitResult fit_core(const std::vector<double>& x, const GarchOrder& order, const Distribution& f,
                   double eta, const FitOptions& options) {
    validate_inputs(x, order, options);
    if (!f.has_density()) {
        throw std::invalid_argument("fit: likelihood '" + f.label() +
                                    "' has no closed-form density");
    }
    if (!(std::isfinite(eta) && eta > 0.0)) {
        throw std::invalid_argument("fit: scale correction must be positive and finite");
    }
    const double m_hat = mean_square(x);
    if (!(m_hat > 0.0)) throw std::invalid_argument("fit: returns are identically zero");

    const GarchParams start0 = default_start(order, m_hat);
    const Presample anchor = default_presample(start0, x);
    const Transform tf{order.p, order.q};
    const Criterion crit{x, f, eta, anchor, tf};

    std::vector<Eigen::VectorXd> starts;
    if (options.initial_params.has_value()) {
        const auto& init = *options.initial_params;
        init.validate();
        if (init.a.size() != order.p || init.b.size() != order.q) {
            throw std::invalid_argument("fit: initial_params order does not match the model order");
        }
        starts.push_back(tf.from_params(init));
    }
    starts.push_back(tf.from_params(start0));
    starts.push_back(tf.from_params(scaled(start0, 1.3, 0.5, 0.9)));
    starts.push_back(tf.from_params(scaled(start0, 0.7, 1.8, 0.7)));

    // Deduplicate while preserving order, then cap at the requested count.
    std::vector<Eigen::VectorXd> use;
    for (const auto& s : starts) {
        bool dup = false;
        for (const auto& t : use) dup = dup || (s - t).norm() < 1e-8;
        if (!dup) use.push_back(s);
        if (use.size() == static_cast<size_t>(options.multistart)) break;
    }

    bool have = false;
    OptimResult best;
    for (const auto& u0 : use) {
        OptimResult run;
        try {
            run = minimize_bfgs([&crit](const Eigen::VectorXd& u, Eigen::VectorXd& g) {
                return crit(u, g);
            }, u0, options.gradient_tolerance, options.max_iterations);
        } catch (const std::invalid_argument&) {
            continue;  // criterion not finite at this start
        }
        const bool better = !have || (run.converged && !best.converged) ||
                            (run.converged == best.converged && run.value < best.value);
        if (better) {
            best = run;
            have = true;
        }
    }
    if (!have) {
        throw std::runtime_error("fit: criterion was not finite at any starting point");
    }

    FitResult out;
    out.params = tf.to_params(best.x);
    out.loglik = -best.value;
    out.gradient_norm = best.gradient_norm;
    out.converged = best.converged;
    out.iterations = best.iterations;
    out.presample = anchor;

    const auto path = filter(out.params, x, anchor);
    out.residuals.resize(x.size());
    for (size_t t = 0; t < x.size(); ++t) {
        out.residuals[t] = x[t] / (out.params.sigma * path.v[t]);
    }
    const double s2 = out.params.sigma * out.params.sigma;
    for (double a : out.params.a) {
        if (a * s2 <= 1e-5 * m_hat) out.at_boundary = true;
    }
    for (double b : out.params.b) {
        if (b <= 1e-5) out.at_boundary = true;
    }
    return out;
}

[[noreturn]] void rethrow_stage(const char* stage, const std::exception& e) {
    throw std::runtime_error(std::string("two-step fit, ") + stage + ": " + e.what());
}

}  // namespace

FitResult fit_gaussian(const std::vector<double>& returns, const GarchOrder& order,
                       const FitOptions& options) {
    return fit_core(returns, order, Distribution::gaussian(), 1.0, options);
}

TwoStepFit fit_two_step(const std::vector<double>& returns, const GarchOrder& order,
                        const Distribution& f, const FitOptions& options) {
    FitResult first;
    try {
        first = fit_gaussian(returns, order, options);
    } catch (const std::exception& e) {
        rethrow_stage("first step (gaussian QMLE)", e);
    }
    return fit_two_step(returns, order, f, first, options);
}

TwoStepFit fit_two_step(const std::vector<double>& returns, const GarchOrder& order,
                        const Distribution& f, const FitResult& first_step,
                        const FitOptions& options) {
    if (!f.has_density()) {
        throw std::invalid_argument("fit_two_step: likelihood '" + f.label() +
                                    "' has no closed-form density");
    }

    EtaSolution eta;
    if (f.family() == Family::gaussian) {
        // The gaussian scale equation is solved exactly by construction at the
        // first-step optimum, so the correction is pinned at one.
        eta.eta = 1.0;
        eta.bracket = {1.0, 1.0};
        double m2 = 0.0, q = 0.0;
        for (double r : first_step.residuals) {
            m2 += r * r;
            q += f.log_density(r);
        }
        const double n = static_cast<double>(first_step.residuals.size());
        eta.h_mean_residual = 1.0 - m2 / n;
        eta.q_value = q / n;
    } else {
        try {
            eta = eta_empirical(f, first_step.residuals);
        } catch (const std::exception& e) {
            rethrow_stage("scale-correction step", e);
        }
    }

    FitOptions second_options = options;
    second_options.initial_params = first_step.params;
    FitResult second;
    try {
        second = fit_core(returns, order, f, eta.eta, second_options);
    } catch (const std::exception& e) {
        rethrow_stage(("second step (" + f.label() + ")").c_str(), e);
    }

    TwoStepFit out{first_step, eta, second, f, CovarianceBlocks{}};
    try {
        const auto stats = k_stats(second.params, returns, second.presample);
        const auto mf = moment_functionals(f, second.residuals, eta.eta);
        out.covariance = covariance_blocks(stats, mf, second.params.sigma, eta.eta);
    } catch (const std::exception& e) {
        rethrow_stage("covariance step", e);
    }
    return out;
}

FitResult fit_oracle(const std::vector<double>& returns, const GarchOrder& order,
                     const Distribution& f, double eta, const FitOptions& options) {
    return fit_core(returns, order, f, eta, options);
}

double fit_criterion(const std::vector<double>& returns, const Distribution& f, double eta,
                     const GarchParams& params, Eigen::VectorXd* gradient) {
    params.validate();
    if (!f.has_density()) {
        throw std::invalid_argument("fit_criterion: likelihood '" + f.label() +
                                    "' has no closed-form density");
    }
    if (!(std::isfinite(eta) && eta > 0.0)) {
        throw std::invalid_argument("fit_criterion: scale correction must be positive and finite");
    }
    if (returns.empty()) throw std::invalid_argument("fit_criterion: returns are empty");
    const double m_hat = mean_square(returns);
    if (!(m_hat > 0.0)) throw std::invalid_argument("fit_criterion: returns are identically zero");
    const Presample anchor = default_presample(default_start(params.order(), m_hat), returns);
    const auto path = filter(params, returns, anchor);

    const size_t T = returns.size();
    const Eigen::Index npq = path.grad.cols();
    double sum = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(npq + 1);
    for (size_t t = 0; t < T; ++t) {
        const double v = path.v[t];
        const double sv = params.sigma * v;
        const double z = returns[t] / (eta * sv);
        sum += -std::log(sv) + f.log_density(z);
        if (gradient != nullptr) {
            const double w = 1.0 + f.h(z);
            g(0) -= w / params.sigma;
            g.tail(npq) -= (w / v) * path.grad.row(static_cast<Eigen::Index>(t)).transpose();
        }
    }
    if (gradient != nullptr) *gradient = g / static_cast<double>(T);
    return sum / static_cast<double>(T);
}

ScoreTriples scores(const std::vector<double>& returns, const TwoStepFit& fit) {
    const auto& th1 = fit.gaussian.params;
    const auto& th2 = fit.non_gaussian.params;
    const auto path1 = filter(th1, returns, fit.gaussian.presample);
    const auto path2 = filter(th2, returns, fit.non_gaussian.presample);
    const double eta = fit.eta_hat.eta;
    const auto& f = fit.likelihood;

    const Eigen::Index T = static_cast<Eigen::Index>(returns.size());
    const Eigen::Index npq = path1.grad.cols();
    ScoreTriples s;
    s.s1.resize(T, npq + 1);
    s.s2.resize(T);
    s.s3.resize(T, npq + 1);
    Eigen::VectorXd k(npq + 1);
    for (Eigen::Index t = 0; t < T; ++t) {
        const size_t ts = static_cast<size_t>(t);
        // First step: gaussian score at theta_tilde.
        const double v1 = path1.v[ts];
        const double z1 = returns[ts] / (th1.sigma * v1);
        k(0) = 1.0 / th1.sigma;
        k.tail(npq) = path1.grad.row(t).transpose() / v1;
        s.s1.row(t) = (z1 * z1 - 1.0) * k.transpose();
        // Scale-correction score at (theta_tilde, eta_hat).
        s.s2(t) = -(1.0 + f.h(z1 / eta)) / eta;
        // Second step: f-likelihood score at theta_hat.
        const double v2 = path2.v[ts];
        const double z2 = returns[ts] / (eta * th2.sigma * v2);
        k(0) = 1.0 / th2.sigma;
        k.tail(npq) = path2.grad.row(t).transpose() / v2;
        s.s3.row(t) = -(1.0 + f.h(z2)) * k.transpose();
    }
    return s;
}

}  // namespace ngarch
