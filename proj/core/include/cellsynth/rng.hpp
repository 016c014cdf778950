#pragma once

#include <cmath>
#include <cstdint>

namespace cellsynth {

// Deterministic 64-bit generator (splitmix64) with hand-rolled distributions.
// The standard library distribution objects are implementation-defined, which
// would break byte-identical reruns across toolchains, so everything that
// needs randomness in this project draws from this one generator.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer on [lo, hi], inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        const double span = static_cast<double>(hi - lo) + 1.0;
        return lo + static_cast<int64_t>(next_double() * span);
    }

    // Standard normal via Box-Muller; always consumes two draws.
    double normal() {
        const double u1 = 1.0 - next_double(); // (0, 1]
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    // Gamma(shape, 1) by Marsaglia-Tsang squeeze; exact for all shape > 0.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = next_double();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = next_double();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Beta(a, b) from two Gamma draws.
    double beta(double a, double b) {
        const double ga = gamma(a);
        const double gb = gamma(b);
        return ga / (ga + gb);
    }

private:
    uint64_t state_;
};

// Independent per-item seed: the (index+1)-th output of a splitmix64 stream
// seeded with `base`. Used wherever a dataset derives one seed per element.
inline uint64_t derive_seed(uint64_t base, uint64_t index) {
    uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace cellsynth
