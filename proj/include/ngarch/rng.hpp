#pragma once

#include <cstdint>
#include <random>

namespace ngarch {

// Deterministic random source. All variate algorithms are implemented here
// rather than through std:: distributions so that identical seeds produce
// identical streams on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on the open interval (0, 1).
    double uniform();
    // Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal();
    // Exponential with unit rate.
    double exponential();
    // Gamma(k, 1) via Marsaglia-Tsang squeeze, with the power boost for k < 1.
    double gamma(double k);

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

// Mixes a master seed with a stream index into an independent stream seed.
// Used to give each Monte Carlo replication its own generator so results do
// not depend on how replications are scheduled across threads.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index);

}  // namespace ngarch
