#include "ngarch/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "ngarch/asymptotics.hpp"
#include "ngarch/eta.hpp"
#include "ngarch/moments.hpp"
#include "ngarch/rng.hpp"

namespace ngarch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(const std::vector<double>& data) {
    std::uint64_t hash = 14695981039346656037ull;
    for (double x : data) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &x, sizeof(bits));
        for (int byte = 0; byte < 8; ++byte) {
            hash ^= (bits >> (8 * byte)) & 0xffu;
            hash *= 1099511628211ull;
        }
    }
    return hash;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Eigen::VectorXd params_vector(const GarchParams& p) {
    Eigen::VectorXd v(1 + p.a.size() + p.b.size());
    v(0) = p.sigma;
    for (std::size_t i = 0; i < p.a.size(); ++i) v(1 + i) = p.a[i];
    for (std::size_t j = 0; j < p.b.size(); ++j) v(1 + p.a.size() + j) = p.b[j];
    return v;
}

// One estimator's outcome on one replication.
struct RepCell {
    Eigen::VectorXd estimate;
    Eigen::VectorXd standardized;  // dim + 1 (eta last)
    double eta = kNaN;
    double w = kNaN;
    std::string chosen;
    bool converged = false;
    bool boundary = false;
    std::string error;
};

struct RepSlot {
    std::vector<RepCell> cells;
    std::uint64_t checksum = 0;
};

// Standardizes a parameter estimate against diag/T, leaving NaN where the
// variance came out non-positive.
void standardize_params(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth,
                        const Eigen::VectorXd& diag, double T, Eigen::VectorXd* out) {
    for (Eigen::Index i = 0; i < estimate.size(); ++i) {
        const double v = diag(i);
        (*out)(i) = v > 0.0 ? (estimate(i) - truth(i)) / std::sqrt(v / T) : kNaN;
    }
}

}  // namespace

EstimatorSpec EstimatorSpec::gaussian() { return {EstimatorKind::gaussian, {}, {}}; }
EstimatorSpec EstimatorSpec::two_step(const Distribution& f) {
    return {EstimatorKind::two_step, f, {}};
}
EstimatorSpec EstimatorSpec::oracle(const Distribution& f) {
    return {EstimatorKind::oracle, f, {}};
}
EstimatorSpec EstimatorSpec::mle() { return {EstimatorKind::mle, {}, {}}; }
EstimatorSpec EstimatorSpec::four_step(CandidateGrid grid) {
    return {EstimatorKind::four_step, {}, std::move(grid)};
}
EstimatorSpec EstimatorSpec::aggregate(const Distribution& f) {
    return {EstimatorKind::aggregate, f, {}};
}

std::string EstimatorSpec::label() const {
    switch (kind) {
        case EstimatorKind::gaussian: return "gaussian";
        case EstimatorKind::two_step: return "two_step(" + likelihood->label() + ")";
        case EstimatorKind::oracle: return "oracle(" + likelihood->label() + ")";
        case EstimatorKind::mle: return "mle";
        case EstimatorKind::four_step: return "four_step";
        case EstimatorKind::aggregate: return "aggregate(" + likelihood->label() + ")";
    }
    return "unknown";
}

namespace {

void validate_config(const McConfig& config) {
    if (config.replications < 2)
        throw std::invalid_argument("monte carlo: needs at least 2 replications");
    if (config.T < 100) throw std::invalid_argument("monte carlo: T must be at least 100");
    if (config.estimators.empty())
        throw std::invalid_argument("monte carlo: no estimators configured");
    config.true_params.validate();
    std::set<std::string> labels;
    for (const auto& spec : config.estimators) {
        if (!labels.insert(spec.label()).second)
            throw std::invalid_argument("monte carlo: duplicate estimator " + spec.label());
        switch (spec.kind) {
            case EstimatorKind::two_step:
            case EstimatorKind::aggregate:
            case EstimatorKind::oracle:
                if (!spec.likelihood || !spec.likelihood->has_density())
                    throw std::invalid_argument("monte carlo: " + spec.label() +
                                                " needs a likelihood with a density");
                break;
            case EstimatorKind::four_step:
                if (!spec.grid)
                    throw std::invalid_argument("monte carlo: four_step needs a candidate grid");
                spec.grid->candidates();  // validates the grid
                break;
            case EstimatorKind::mle:
                if (!config.innovation.has_density())
                    throw std::invalid_argument(
                        "monte carlo: mle needs an innovation with a density");
                break;
            case EstimatorKind::gaussian: break;
        }
        if (spec.kind == EstimatorKind::oracle && !config.innovation.has_density())
            throw std::invalid_argument(
                "monte carlo: oracle needs an innovation with a density");
    }
}

// Per-spec constants resolved once before the replication loop.
struct SpecContext {
    EstimatorSpec spec;
    double eta_oracle = kNaN;  // population eta for the oracle kind
    double eta_target = kNaN;  // population eta for the standardized eta column
};

class RepWorker {
public:
    RepWorker(const McConfig& config, const std::vector<SpecContext>& specs,
              const Eigen::VectorXd& truth)
        : config_(config), specs_(specs), truth_(truth) {}

    RepSlot process(std::size_t rep) const {
        RepSlot slot;
        slot.cells.resize(specs_.size());
        const auto dim = truth_.size();
        for (auto& cell : slot.cells) {
            cell.estimate = Eigen::VectorXd::Constant(dim, kNaN);
            cell.standardized = Eigen::VectorXd::Constant(dim + 1, kNaN);
        }

        std::vector<double> path;
        try {
            path = simulate(config_.true_params, config_.innovation, config_.T,
                            config_.burn_in, stream_seed(config_.master_seed, rep));
        } catch (const std::exception& e) {
            for (auto& cell : slot.cells) cell.error = std::string("simulation: ") + e.what();
            return slot;
        }
        slot.checksum = fnv1a(path);

        const GarchOrder order = config_.true_params.order();

        // Shared first step and shared two-step fits (paired design: every
        // estimator sees the same path, and identical sub-fits are reused).
        std::optional<FitResult> first;
        std::string first_error;
        auto ensure_first = [&]() -> const FitResult* {
            if (first) return &*first;
            if (!first_error.empty()) return nullptr;
            try {
                first = fit_gaussian(path, order, config_.fit_options);
                return &*first;
            } catch (const std::exception& e) {
                first_error = std::string("first step: ") + e.what();
                return nullptr;
            }
        };
        std::vector<std::pair<std::string, TwoStepFit>> two_step_cache;
        two_step_cache.reserve(specs_.size());  // keeps returned pointers stable
        auto ensure_two_step = [&](const Distribution& f) -> const TwoStepFit* {
            const std::string key = f.label();
            for (const auto& [k, v] : two_step_cache)
                if (k == key) return &v;
            const FitResult* g = ensure_first();
            if (!g) throw std::runtime_error(first_error);
            two_step_cache.emplace_back(key,
                                        fit_two_step(path, order, f, *g, config_.fit_options));
            return &two_step_cache.back().second;
        };

        for (std::size_t s = 0; s < specs_.size(); ++s) {
            auto& cell = slot.cells[s];
            const auto& ctx = specs_[s];
            try {
                switch (ctx.spec.kind) {
                    case EstimatorKind::gaussian: run_gaussian(path, ensure_first, first_error, cell); break;
                    case EstimatorKind::two_step: run_two_step(ctx, ensure_two_step, cell); break;
                    case EstimatorKind::four_step: run_four_step(ctx, path, order, ensure_first, first_error, cell); break;
                    case EstimatorKind::aggregate: run_aggregate(ctx, ensure_two_step, cell); break;
                    case EstimatorKind::oracle:
                        run_fixed_eta(path, order, *ctx.spec.likelihood, ctx.eta_oracle, cell);
                        break;
                    case EstimatorKind::mle:
                        run_fixed_eta(path, order, config_.innovation, 1.0, cell);
                        break;
                }
            } catch (const std::exception& e) {
                cell.converged = false;
                cell.error = e.what();
            }
        }
        return slot;
    }

private:
    template <typename EnsureFirst>
    void run_gaussian(const std::vector<double>& path, EnsureFirst& ensure_first,
                      const std::string& first_error, RepCell& cell) const {
        const FitResult* fit = ensure_first();
        if (!fit) throw std::runtime_error(first_error);
        cell.estimate = params_vector(fit->params);
        cell.converged = fit->converged;
        cell.boundary = fit->at_boundary;
        if (!fit->converged) cell.error = "optimizer did not converge";
        try {
            const auto stats = k_stats(fit->params, path, fit->presample);
            const auto mf = moment_functionals(Distribution::gaussian(), fit->residuals, 1.0);
            const auto blocks = covariance_blocks(stats, mf, fit->params.sigma, 1.0);
            standardize_params(cell.estimate, truth_, blocks.sigma_G.diagonal(),
                               static_cast<double>(config_.T), &cell.standardized);
        } catch (const std::exception&) {
            // standardization is best-effort; the estimate stands
        }
    }

    template <typename EnsureTwoStep>
    void run_two_step(const SpecContext& ctx, EnsureTwoStep& ensure_two_step,
                      RepCell& cell) const {
        const TwoStepFit* fit = ensure_two_step(*ctx.spec.likelihood);
        fill_from_two_step(*fit, ctx.eta_target, cell);
    }

    template <typename EnsureFirst>
    void run_four_step(const SpecContext& ctx, const std::vector<double>& path,
                       const GarchOrder& order, EnsureFirst& ensure_first,
                       const std::string& first_error, RepCell& cell) const {
        const FitResult* g = ensure_first();
        if (!g) throw std::runtime_error(first_error);
        const auto selection = choose_likelihood(g->residuals, *ctx.spec.grid);
        const auto fit = fit_two_step(path, order, selection.chosen, *g, config_.fit_options);
        cell.chosen = selection.chosen.label();
        fill_from_two_step(fit, kNaN, cell);
    }

    template <typename EnsureTwoStep>
    void run_aggregate(const SpecContext& ctx, EnsureTwoStep& ensure_two_step,
                       RepCell& cell) const {
        const TwoStepFit* fit = ensure_two_step(*ctx.spec.likelihood);
        const auto agg = aggregate(*fit);
        cell.estimate = params_vector(agg.params);
        cell.eta = fit->eta_hat.eta;
        cell.w = agg.w_star;
        cell.converged = true;  // aggregate throws if either stage failed
        cell.boundary = fit->gaussian.at_boundary || fit->non_gaussian.at_boundary;
        standardize_params(cell.estimate, truth_, agg.sigma_star_diag,
                           static_cast<double>(config_.T), &cell.standardized);
    }

    void run_fixed_eta(const std::vector<double>& path, const GarchOrder& order,
                       const Distribution& f, double eta, RepCell& cell) const {
        const auto fit = fit_oracle(path, order, f, eta, config_.fit_options);
        cell.estimate = params_vector(fit.params);
        cell.converged = fit.converged;
        cell.boundary = fit.at_boundary;
        if (!fit.converged) cell.error = "optimizer did not converge";
        try {
            const auto stats = k_stats(fit.params, path, fit.presample);
            const auto mf = moment_functionals(f, fit.residuals, eta);
            const auto blocks = covariance_blocks(stats, mf, fit.params.sigma, eta);
            standardize_params(cell.estimate, truth_, blocks.sigma_1.diagonal(),
                               static_cast<double>(config_.T), &cell.standardized);
        } catch (const std::exception&) {
        }
    }

    void fill_from_two_step(const TwoStepFit& fit, double eta_target, RepCell& cell) const {
        cell.estimate = params_vector(fit.non_gaussian.params);
        cell.eta = fit.eta_hat.eta;
        cell.converged = fit.gaussian.converged && fit.non_gaussian.converged;
        cell.boundary = fit.non_gaussian.at_boundary;
        if (!cell.converged) cell.error = "optimizer did not converge";
        standardize_params(cell.estimate, truth_, fit.covariance.sigma_2.diagonal(),
                           static_cast<double>(config_.T), &cell.standardized);
        if (std::isfinite(eta_target) && fit.covariance.sigma_eta > 0.0)
            cell.standardized(cell.estimate.size()) =
                (cell.eta - eta_target) /
                std::sqrt(fit.covariance.sigma_eta / static_cast<double>(config_.T));
    }

    const McConfig& config_;
    const std::vector<SpecContext>& specs_;
    const Eigen::VectorXd& truth_;
};

ParamSummary summarize(const std::vector<double>& values, double truth) {
    ParamSummary s;
    const auto n = static_cast<double>(values.size());
    if (values.empty()) {
        s.mean = s.bias = s.variance = s.mse = s.median = kNaN;
        return s;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0, mse = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
        mse += (v - truth) * (v - truth);
    }
    s.mean = mean;
    s.bias = mean - truth;
    s.variance = values.size() > 1 ? ss / (n - 1.0) : 0.0;
    s.mse = mse / n;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return s;
}

}  // namespace

McReport run(const McConfig& config) {
    validate_config(config);
    const auto dim = static_cast<Eigen::Index>(1 + config.true_params.a.size() +
                                               config.true_params.b.size());
    const Eigen::VectorXd truth = params_vector(config.true_params);

    std::vector<SpecContext> specs;
    specs.reserve(config.estimators.size());
    for (const auto& spec : config.estimators) {
        SpecContext ctx;
        ctx.spec = spec;
        if (spec.kind == EstimatorKind::oracle) {
            try {
                ctx.eta_oracle = eta_population(*spec.likelihood, config.innovation).eta;
            } catch (const std::exception& e) {
                throw std::invalid_argument("monte carlo: oracle scale correction failed: " +
                                            std::string(e.what()));
            }
            ctx.eta_target = ctx.eta_oracle;
        } else if (spec.kind == EstimatorKind::two_step ||
                   spec.kind == EstimatorKind::aggregate) {
            if (config.innovation.has_density()) {
                try {
                    ctx.eta_target = eta_population(*spec.likelihood, config.innovation).eta;
                } catch (const std::exception&) {
                    // no finite population target: eta column stays NaN
                }
            }
        }
        specs.push_back(std::move(ctx));
    }

    const std::size_t n_reps = config.replications;
    std::vector<RepSlot> slots(n_reps);
    const RepWorker worker(config, specs, truth);

    unsigned n_threads = config.threads ? config.threads
                                        : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(
        std::min<std::size_t>(n_threads, n_reps));
    std::atomic<std::size_t> next{0};
    auto drain = [&]() {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= n_reps) break;
            slots[r] = worker.process(r);
        }
    };
    if (n_threads <= 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(drain);
        for (auto& t : pool) t.join();
    }

    McReport report;
    report.param_names.emplace_back("sigma");
    for (std::size_t i = 0; i < config.true_params.a.size(); ++i)
        report.param_names.push_back("a" + std::to_string(i + 1));
    for (std::size_t j = 0; j < config.true_params.b.size(); ++j)
        report.param_names.push_back("b" + std::to_string(j + 1));
    report.true_values = truth;
    report.T = config.T;
    report.replications = n_reps;
    report.master_seed = config.master_seed;
    report.path_checksums.resize(n_reps);
    for (std::size_t r = 0; r < n_reps; ++r) report.path_checksums[r] = slots[r].checksum;

    for (std::size_t s = 0; s < specs.size(); ++s) {
        EstimatorResults res;
        res.label = specs[s].spec.label();
        res.eta_target = specs[s].eta_target;
        res.estimates = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_reps), dim, kNaN);
        res.standardized =
            Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_reps), dim + 1, kNaN);
        res.eta_hat = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_reps), kNaN);
        res.w_star = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_reps), kNaN);
        res.converged.assign(n_reps, 0);
        res.at_boundary.assign(n_reps, 0);
        if (specs[s].spec.kind == EstimatorKind::four_step) res.chosen.resize(n_reps);
        for (std::size_t r = 0; r < n_reps; ++r) {
            const auto& cell = slots[r].cells[s];
            res.estimates.row(static_cast<Eigen::Index>(r)) = cell.estimate.transpose();
            res.standardized.row(static_cast<Eigen::Index>(r)) = cell.standardized.transpose();
            res.eta_hat(static_cast<Eigen::Index>(r)) = cell.eta;
            res.w_star(static_cast<Eigen::Index>(r)) = cell.w;
            res.converged[r] = cell.converged ? 1 : 0;
            res.at_boundary[r] = cell.boundary ? 1 : 0;
            if (!res.chosen.empty()) res.chosen[r] = cell.chosen;
            if (!cell.converged) {
                ++res.failures;
                if (!cell.error.empty() &&
                    std::find(res.failure_reasons.begin(), res.failure_reasons.end(),
                              cell.error) == res.failure_reasons.end() &&
                    res.failure_reasons.size() < 8)
                    res.failure_reasons.push_back(cell.error);
            }
        }
        for (Eigen::Index j = 0; j < dim; ++j) {
            std::vector<double> column;
            column.reserve(n_reps);
            for (std::size_t r = 0; r < n_reps; ++r)
                if (res.converged[r]) column.push_back(res.estimates(static_cast<Eigen::Index>(r), j));
            res.summary.push_back(summarize(column, truth(j)));
        }
        report.estimators.push_back(std::move(res));
    }
    return report;
}

RatioTable ratio_tables(const McReport& report, const std::string& numerator_label,
                        const std::string& denominator_label) {
    const EstimatorResults* num = nullptr;
    const EstimatorResults* den = nullptr;
    for (const auto& e : report.estimators) {
        if (e.label == numerator_label) num = &e;
        if (e.label == denominator_label) den = &e;
    }
    if (!num || !den)
        throw std::invalid_argument("ratio_tables: unknown estimator label");

    RatioTable table;
    table.numerator = numerator_label;
    table.denominator = denominator_label;
    table.param_names = report.param_names;

    std::vector<std::size_t> common;
    for (std::size_t r = 0; r < report.replications; ++r)
        if (num->converged[r] && den->converged[r]) common.push_back(r);
    table.common_replications = common.size();

    const auto dim = report.true_values.size();
    for (Eigen::Index j = 0; j < dim; ++j) {
        std::vector<double> a, b;
        a.reserve(common.size());
        b.reserve(common.size());
        for (std::size_t r : common) {
            a.push_back(num->estimates(static_cast<Eigen::Index>(r), j));
            b.push_back(den->estimates(static_cast<Eigen::Index>(r), j));
        }
        const auto sa = summarize(a, report.true_values(j));
        const auto sb = summarize(b, report.true_values(j));
        RatioEntry entry;
        if (common.size() < 2 || !(sb.variance > 0.0) || !(sb.mse > 0.0)) {
            entry.variance_ratio = kNaN;
            entry.mse_ratio = kNaN;
            entry.flagged = true;
        } else {
            entry.variance_ratio = sa.variance / sb.variance;
            entry.mse_ratio = sa.mse / sb.mse;
        }
        table.entries.push_back(entry);
    }
    return table;
}

NormalitySummary normality_check(const std::vector<double>& values) {
    NormalitySummary s;
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values)
        if (std::isfinite(v)) finite.push_back(v);
    s.n = finite.size();
    if (finite.size() < 2) {
        s.degenerate = true;
        s.mean = finite.empty() ? kNaN : finite.front();
        s.variance = s.skewness = s.excess_kurtosis = s.ks_statistic = kNaN;
        return s;
    }
    const auto n = static_cast<double>(finite.size());
    double mean = 0.0;
    for (double v : finite) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : finite) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.mean = mean;
    s.variance = m2 * n / (n - 1.0);
    if (m2 < 1e-300) {
        s.degenerate = true;
        s.skewness = s.excess_kurtosis = kNaN;
        s.ks_statistic = kNaN;
        return s;
    }
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;

    std::vector<double> sorted = finite;
    std::sort(sorted.begin(), sorted.end());
    double d_stat = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = normal_cdf(sorted[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d_stat = std::max({d_stat, cdf - lo, hi - cdf});
    }
    s.ks_statistic = d_stat;
    return s;
}

}  // namespace ngarch
