#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ngarch/asymptotics.hpp"
#include "ngarch/garch.hpp"
#include "ngarch/moments.hpp"
#include "ngarch/selection.hpp"

using namespace ngarch;

namespace {

GarchParams model() {
    GarchParams gp;
    gp.sigma = 0.5;
    gp.a = {0.35};
    gp.b = {0.3};
    return gp;
}

}  // namespace

TEST_CASE("candidate grid orders lightest tails first and validates") {
    const auto grid = CandidateGrid::default_grid();
    const auto c = grid.candidates();
    REQUIRE(c.size() == 15);
    CHECK(c[0].family() == Family::gaussian);
    CHECK(c[1] == Distribution::generalized_gaussian(1.0));
    CHECK(c[4] == Distribution::generalized_gaussian(0.4));
    CHECK(c[5] == Distribution::student_t(20.0));
    CHECK(c[14] == Distribution::student_t(2.5));

    CandidateGrid bad = grid;
    bad.t_dofs.push_back(2.0);
    CHECK_THROWS_AS(bad.candidates(), std::invalid_argument);
    bad = grid;
    bad.gg_shapes.push_back(0.0);
    CHECK_THROWS_AS(bad.candidates(), std::invalid_argument);
    bad = grid;
    bad.gg_shapes.push_back(1.2);
    CHECK_THROWS_AS(bad.candidates(), std::invalid_argument);
    bad.allow_shapes_above_one = true;
    CHECK(bad.candidates().size() == 16);
    CandidateGrid empty;
    empty.include_gaussian = false;
    CHECK_THROWS_AS(empty.candidates(), std::invalid_argument);
    empty.include_gaussian = true;
    CHECK(empty.candidates().size() == 1);
}

TEST_CASE("selection on heavy-tailed residuals tracks the efficient candidate") {
    // i.i.d. t(4) residuals: the chosen candidate's efficiency factor must be
    // within 2% of the factor of the matched t(4) candidate.
    const auto draws = Distribution::student_t(4.0).sample(100000, 42u);
    const auto sel = choose_likelihood(draws, CandidateGrid::default_grid());

    const auto sol4 = eta_empirical(Distribution::student_t(4.0), draws);
    const double a4 = moment_functionals(Distribution::student_t(4.0), draws, sol4.eta).a_value;
    double chosen_a = 0.0;
    for (const auto& s : sel.table)
        if (s.candidate == sel.chosen) chosen_a = s.a_hat;
    CHECK(chosen_a <= a4 * 1.02);
    CHECK(chosen_a >= a4 * 0.8);  // and not absurdly below: same scale
    CHECK(sel.table.size() == 15);
    for (const auto& s : sel.table) CHECK(s.ok);
}

TEST_CASE("selection on gaussian residuals picks a light-tailed candidate") {
    const auto draws = Distribution::gaussian().sample(100000, 7u);
    const auto sel = choose_likelihood(draws, CandidateGrid::default_grid());
    const bool light = sel.chosen.family() == Family::gaussian ||
                       (sel.chosen.family() == Family::student_t && sel.chosen.shape() >= 15.0) ||
                       (sel.chosen.family() == Family::generalized_gaussian && sel.chosen.shape() >= 1.0);
    CAPTURE(sel.chosen.label());
    CHECK(light);
}

TEST_CASE("selection on infinite-kurtosis residuals picks the heaviest candidate") {
    const auto draws = Distribution::transformed_stable(1.3).sample(100000, 11u);
    const auto sel = choose_likelihood(draws, CandidateGrid::default_grid());
    CHECK(sel.chosen == Distribution::student_t(2.5));
}

TEST_CASE("selection depends only on the empirical distribution") {
    auto draws = Distribution::student_t(5.0).sample(5000, 3u);
    const auto base = choose_likelihood(draws, CandidateGrid::default_grid());
    std::shuffle(draws.begin(), draws.end(), std::mt19937(99));
    const auto shuffled = choose_likelihood(draws, CandidateGrid::default_grid());
    CHECK(base.chosen == shuffled.chosen);
    REQUIRE(base.table.size() == shuffled.table.size());
    for (std::size_t i = 0; i < base.table.size(); ++i) {
        CHECK(base.table[i].a_hat == shuffled.table[i].a_hat);
        CHECK(base.table[i].eta == shuffled.table[i].eta);
    }
}

TEST_CASE("empirical efficiency factor converges to its population value") {
    const std::vector<std::pair<Distribution, Distribution>> pairs = {
        {Distribution::student_t(4.0), Distribution::student_t(7.0)},
        {Distribution::generalized_gaussian(0.6), Distribution::student_t(5.0)},
        {Distribution::generalized_gaussian(0.8), Distribution::student_t(7.0)},
        {Distribution::student_t(5.0), Distribution::generalized_gaussian(1.0)},
        {Distribution::generalized_gaussian(1.0), Distribution::generalized_gaussian(0.6)},
    };
    const std::size_t n = 1000000, batches = 20;
    std::uint64_t seed = 1000;
    for (const auto& [f, g] : pairs) {
        const double a_pop = a_value(f, g);
        const auto draws = g.sample(n, seed++);
        const auto sol = eta_empirical(f, draws);
        const double a_full = moment_functionals(f, draws, sol.eta).a_value;
        // batch standard error, each batch re-estimating its own eta
        std::vector<double> batch_a;
        const std::size_t bs = n / batches;
        for (std::size_t b = 0; b < batches; ++b) {
            std::vector<double> chunk(draws.begin() + b * bs, draws.begin() + (b + 1) * bs);
            const auto bsol = eta_empirical(f, chunk);
            batch_a.push_back(moment_functionals(f, chunk, bsol.eta).a_value);
        }
        double m = 0.0, s2 = 0.0;
        for (double a : batch_a) m += a;
        m /= batches;
        for (double a : batch_a) s2 += (a - m) * (a - m);
        const double se_full = std::sqrt(s2 / (batches - 1) / batches);
        CAPTURE(f.label());
        CAPTURE(g.label());
        CHECK(std::abs(a_full - a_pop) <= std::max(3.0 * se_full, 1e-4));
    }
}

TEST_CASE("four-step fit with a gaussian-only grid coincides with the gaussian fit") {
    const auto x = simulate(model(), Distribution::gaussian(), 3000, 500, 17u);
    CandidateGrid grid;
    grid.include_gaussian = true;
    const auto four = four_step_fit(x, {1, 1}, grid);
    CHECK(four.selection.chosen.family() == Family::gaussian);
    CHECK(four.fit.eta_hat.eta == 1.0);
    const auto direct = fit_gaussian(x, {1, 1});
    CHECK(four.fit.non_gaussian.params.sigma == doctest::Approx(direct.params.sigma).epsilon(1e-6));
    CHECK(four.fit.non_gaussian.params.a[0] == doctest::Approx(direct.params.a[0]).epsilon(1e-5));
    CHECK(four.fit.non_gaussian.params.b[0] == doctest::Approx(direct.params.b[0]).epsilon(1e-5));
}

TEST_CASE("four-step fit on heavy-tailed data picks a heavy candidate and reports the scan") {
    const auto x = simulate(model(), Distribution::student_t(4.0), 4000, 500, 23u);
    const auto four = four_step_fit(x, {1, 1}, CandidateGrid::default_grid());
    REQUIRE(four.selection.table.size() == 15);
    CHECK(four.fit.non_gaussian.converged);
    CHECK(four.fit.likelihood == four.selection.chosen);
    // t(4) data: the chosen candidate must be heavier than the gaussian
    CHECK(four.selection.chosen.family() != Family::gaussian);
    // the scan table carries a finite factor for every candidate
    for (const auto& s : four.selection.table) {
        CAPTURE(s.candidate.label());
        CHECK(s.ok);
        CHECK(std::isfinite(s.a_hat));
    }
}

TEST_CASE("four-step fit tags stage failures") {
    std::vector<double> bad(100, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_WITH_AS(four_step_fit(bad, {1, 1}, CandidateGrid::default_grid()),
                         doctest::Contains("four-step fit, first step"), std::runtime_error);
}

TEST_CASE("aggregation weight matches the per-coordinate optimum") {
    const auto x = simulate(model(), Distribution::student_t(7.0), 5000, 500, 31u);
    const auto fit = fit_two_step(x, {1, 1}, Distribution::student_t(5.0));
    const auto agg = aggregate(fit);

    // all per-coordinate weights equal the common weight, exactly on sample moments
    for (Eigen::Index i = 0; i < agg.weights.size(); ++i) {
        CAPTURE(i);
        CHECK(std::abs(agg.weights(i) - agg.w_star) <= 1e-10);
    }
    CHECK(!agg.clamped);
    CHECK(agg.w_star > 0.0);
    CHECK(agg.w_star < 1.5);

    // combined variance never exceeds either ingredient, coordinate-wise
    for (Eigen::Index i = 0; i < agg.sigma_star_diag.size(); ++i) {
        const double s2 = fit.covariance.sigma_2(i, i);
        const double sg = fit.covariance.sigma_G(i, i);
        CHECK(agg.sigma_star_diag(i) <= std::min(s2, sg) + 1e-10);
        // and matches the closed-form diagonal
        const double xi = fit.covariance.xi(i, i);
        const double expect = (s2 * sg - xi * xi) / (s2 + sg - 2.0 * xi);
        CHECK(agg.sigma_star_diag(i) == doctest::Approx(expect).epsilon(1e-10));
    }

    // the combined parameters interpolate the two estimates
    const double w = agg.w_star;
    CHECK(agg.params.a[0] ==
          doctest::Approx(w * fit.non_gaussian.params.a[0] + (1 - w) * fit.gaussian.params.a[0])
              .epsilon(1e-12));
}

TEST_CASE("aggregation with the gaussian likelihood returns the shared estimate") {
    const auto x = simulate(model(), Distribution::student_t(7.0), 3000, 500, 37u);
    const auto fit = fit_two_step(x, {1, 1}, Distribution::gaussian());
    const auto agg = aggregate(fit);
    CHECK(agg.w_star == 0.5);
    CHECK(!agg.clamped);
    // the two stages coincide, so the midpoint is either of them
    CHECK(agg.params.sigma == doctest::Approx(fit.gaussian.params.sigma).epsilon(1e-6));
    CHECK(agg.params.a[0] == doctest::Approx(fit.gaussian.params.a[0]).epsilon(1e-4));
    for (Eigen::Index i = 0; i < agg.sigma_star_diag.size(); ++i)
        CHECK(agg.sigma_star_diag(i) ==
              doctest::Approx(fit.covariance.sigma_G(i, i)).epsilon(1e-12));
}

TEST_CASE("aggregation weight approaches one under very heavy tails") {
    const auto x = simulate(model(), Distribution::student_t(3.0), 20000, 500, 41u);
    const auto fit = fit_two_step(x, {1, 1}, Distribution::student_t(3.0));
    const auto agg = aggregate(fit);
    CHECK(agg.w_star >= 0.8);
    CHECK(agg.w_star <= 1.1);
}

TEST_CASE("aggregation validates its preconditions") {
    const auto x = simulate(model(), Distribution::student_t(7.0), 2000, 500, 47u);
    auto fit = fit_two_step(x, {1, 1}, Distribution::student_t(5.0));
    auto broken = fit;
    broken.non_gaussian.converged = false;
    CHECK_THROWS_AS(aggregate(broken), std::invalid_argument);
    broken = fit;
    broken.non_gaussian.residuals.resize(10);
    CHECK_THROWS_AS(aggregate(broken), std::invalid_argument);
}
