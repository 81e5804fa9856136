#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ngarch/rng.hpp"

namespace ngarch {

enum class Family {
    gaussian,
    student_t,
    generalized_gaussian,
    skewed_t,
    transformed_stable,
};

// A unit-variance, zero-mean density. Serves two roles:
//  - quasi-likelihood (gaussian / student_t / generalized_gaussian): provides
//    log_density together with the score weight h(x) = x f'(x)/f(x) and its
//    derivative, which drive fitting and every variance formula;
//  - innovation model for simulation (all families, including skewed_t and
//    transformed_stable), providing a deterministic sampler.
//
// student_t uses the standardized form with nu > 2; generalized_gaussian has
// exp(-k_beta |x|^beta) tails with beta > 0; skewed_t is a Hansen-style
// skewed t, oriented so that positive skew parameter gives a heavier left
// tail; transformed_stable applies the signed power |z|^(alpha/3) to a
// symmetric alpha-stable draw, yielding tail index 3 (finite variance,
// infinite fourth moment), rescaled to unit variance in closed form.
class Distribution {
public:
    static Distribution gaussian();
    static Distribution student_t(double nu);
    static Distribution generalized_gaussian(double beta);
    static Distribution skewed_t(double nu, double lambda);
    static Distribution transformed_stable(double alpha);

    Family family() const { return family_; }
    double shape() const { return shape_; }
    double skew() const { return skew_; }

    // True for every family with a closed-form density (all but transformed_stable).
    bool has_density() const { return family_ != Family::transformed_stable; }
    // True for the families admissible as fitting likelihoods.
    bool is_quasi_likelihood() const {
        return family_ == Family::gaussian || family_ == Family::student_t ||
               family_ == Family::generalized_gaussian;
    }

    double log_density(double x) const;
    double density(double x) const;

    // h(x) = x f'(x)/f(x).
    double h(double x) const;
    // Exact derivative of h. For generalized_gaussian with beta < 1 the
    // derivative is unbounded at 0; h_prime(0) returns 0 by the convention
    // x h'(x) -> 0.
    double h_prime(double x) const;
    // x * h'(x), computed in closed form; continuous at 0 for every family.
    double x_h_prime(double x) const;

    double sample_one(Rng& rng) const;
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    // Points where the score machinery is not smooth (integration break
    // points): the skewed t switches scale pieces at a/b, the generalized
    // Gaussian has a fractional-power cusp at 0 except for the Gaussian
    // special case beta = 2.
    std::vector<double> kinks() const;

    std::string label() const;

    bool operator==(const Distribution& o) const {
        return family_ == o.family_ && shape_ == o.shape_ && skew_ == o.skew_;
    }

    // Hansen-construction constants, exposed for the quadrature routines.
    double skew_a() const { return c1_; }
    double skew_b() const { return c2_; }
    // Unit-variance scale of the generalized Gaussian family.
    double gg_scale() const { return c2_; }

private:
    Distribution(Family f, double shape, double skew);

    Family family_;
    double shape_ = 0.0;
    double skew_ = 0.0;
    double c1_ = 0.0, c2_ = 0.0, c3_ = 0.0;
};

}  // namespace ngarch
