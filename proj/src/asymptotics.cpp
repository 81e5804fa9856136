#include "ngarch/asymptotics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ngarch/eta.hpp"

namespace ngarch {

namespace {

KMatrixStats k_stats_impl(const GarchParams& params, const std::vector<double>& returns,
                          const Presample& presample) {
    const auto path = filter(params, returns, presample);
    const Eigen::Index T = static_cast<Eigen::Index>(returns.size());
    const Eigen::Index npq = path.grad.cols();
    const Eigen::Index dim = npq + 1;

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd k_bar = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd k(dim);
    for (Eigen::Index t = 0; t < T; ++t) {
        k(0) = 1.0 / params.sigma;
        k.tail(npq) = path.grad.row(t).transpose() / path.v[static_cast<size_t>(t)];
        M.noalias() += k * k.transpose();
        k_bar += k;
    }
    M /= static_cast<double>(T);
    k_bar /= static_cast<double>(T);

    KMatrixStats stats;
    stats.M = M;
    stats.k_bar = k_bar;
    stats.y_bar = k_bar.tail(npq);

    Eigen::MatrixXd var_y =
        M.bottomRightCorner(npq, npq) - stats.y_bar * stats.y_bar.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(var_y);
    const double lam_max = es.eigenvalues().maxCoeff();
    const double lam_min = es.eigenvalues().minCoeff();
    if (!(lam_min > 1e-12 * std::max(lam_max, 1e-12))) {
        // Identify the flattest direction and blame its dominant coordinate.
        Eigen::Index worst = 0;
        es.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
        const std::string name =
            worst < static_cast<Eigen::Index>(params.a.size())
                ? "a" + std::to_string(worst + 1)
                : "b" + std::to_string(worst - static_cast<Eigen::Index>(params.a.size()) + 1);
        throw std::runtime_error(
            "k_stats: variance of the volatility score is singular along parameter '" + name +
            "'; the dynamic coefficients are not identified on this path");
    }
    stats.V = es.operatorInverseSqrt() * es.operatorInverseSqrt();
    return stats;
}

void require_finite_positive(double x, const char* what) {
    if (!(std::isfinite(x) && x > 0.0)) {
        throw std::invalid_argument(std::string("covariance_blocks: ") + what +
                                    " must be positive and finite");
    }
}

}  // namespace

KMatrixStats k_stats(const GarchParams& params, const std::vector<double>& returns) {
    return k_stats_impl(params, returns, default_presample(params, returns));
}

KMatrixStats k_stats(const GarchParams& params, const std::vector<double>& returns,
                     const Presample& presample) {
    return k_stats_impl(params, returns, presample);
}

Eigen::MatrixXd block_inverse(const KMatrixStats& stats) {
    const Eigen::Index npq = stats.y_bar.size();
    const double sigma0 = 1.0 / stats.k_bar(0);
    const Eigen::VectorXd Vy = stats.V * stats.y_bar;
    Eigen::MatrixXd inv(npq + 1, npq + 1);
    inv(0, 0) = sigma0 * sigma0 * (1.0 + stats.y_bar.dot(Vy));
    inv.block(0, 1, 1, npq) = -sigma0 * Vy.transpose();
    inv.block(1, 0, npq, 1) = -sigma0 * Vy;
    inv.bottomRightCorner(npq, npq) = stats.V;
    return inv;
}

CovarianceBlocks covariance_blocks(const KMatrixStats& stats, const MomentFunctionals& moments,
                                   double sigma0, double eta) {
    require_finite_positive(sigma0, "sigma0");
    require_finite_positive(eta, "eta");
    const Eigen::Index dim = stats.M.rows();
    const Eigen::MatrixXd minv =
        stats.M.ldlt().solve(Eigen::MatrixXd::Identity(dim, dim));

    const double quarter_eps4 = moments.e_eps4 / 4.0;
    const double c = moments.e_h1_eps / moments.e_h2;
    const double a = moments.a_value;

    Eigen::MatrixXd e11 = Eigen::MatrixXd::Zero(dim, dim);
    e11(0, 0) = 1.0;

    CovarianceBlocks blocks;
    blocks.sigma_G = quarter_eps4 * minv;
    blocks.sigma_1 = a * minv;
    blocks.sigma_2 = a * minv + (sigma0 * sigma0 * moments.mu) * e11;
    blocks.sigma_eta = eta * eta * (quarter_eps4 - c + a);
    blocks.pi = Eigen::RowVectorXd::Zero(dim);
    blocks.pi(0) = 0.5 * eta * sigma0 * (c - moments.e_eps4 / 2.0);
    blocks.xi = (0.5 * c) * minv -
                (0.5 * sigma0 * sigma0 * (c - moments.e_eps4 / 2.0)) * e11;
    return blocks;
}

double mu(const Distribution& f, const Distribution& g) {
    return moment_functionals(f, g, eta_population(f, g).eta).mu;
}

double a_value(const Distribution& f, const Distribution& g) {
    return moment_functionals(f, g, eta_population(f, g).eta).a_value;
}

MleGap mle_gap(const Distribution& f, const Distribution& g) {
    const auto m = moment_functionals(f, g, eta_population(f, g).eta);
    MleGap gap;
    gap.gamma_coefficient = m.a_value - 1.0 / m.fisher_gap.value();
    gap.mu = m.mu;
    return gap;
}

}  // namespace ngarch
