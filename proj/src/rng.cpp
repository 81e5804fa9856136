#include "ngarch/rng.hpp"

#include <cmath>

namespace ngarch {

double Rng::uniform() {
    // 53 random bits, offset by half an ulp so 0 and 1 are never returned.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform()));
    double t = 2.0 * M_PI * uniform();
    cached_normal_ = r * std::sin(t);
    has_cached_normal_ = true;
    return r * std::cos(t);
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::gamma(double k) {
    if (k < 1.0) {
        return gamma(k + 1.0) * std::pow(uniform(), 1.0 / k);
    }
    const double d = k - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u = uniform();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
    // splitmix64 finalizer applied twice to the combined key.
    std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ULL * (stream_index + 1);
    for (int i = 0; i < 2; ++i) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        z += 0x9e3779b97f4a7c15ULL;
    }
    return z;
}

}  // namespace ngarch
