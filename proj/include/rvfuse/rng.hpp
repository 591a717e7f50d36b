#pragma once

#include <cstdint>
#include <random>

#include "rvfuse/math.hpp"

namespace rvfuse {

// Deterministic random source. Wraps std::mt19937_64 (bit-stable across
// platforms) and converts to doubles by hand so that no library-dependent
// distribution code leaks into the output stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0, 1).
    double uniform() {
        const double u = (engine_() >> 11) * 0x1.0p-53;
        return (u <= 0.0) ? 0x1.0p-53 : u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via inverse CDF (one uniform per draw, fully portable).
    double normal() { return math::norm_quantile(uniform()); }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    double exponential() { return -std::log1p(-uniform()); }

    double rayleigh(double xi) { return xi * std::sqrt(2.0 * exponential()); }

    // Marsaglia-Tsang gamma(shape, 1). Handles shape < 1 by boosting.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Derive an independent stream for work unit `stream` of a master seed.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace rvfuse
