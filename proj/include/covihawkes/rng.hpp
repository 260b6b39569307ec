#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace covihawkes {

/// Uniform draw in [0, 1) built directly from engine bits, so sequences do
/// not depend on standard-library distribution internals.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Box-Muller transform; the spare variate is discarded.
inline double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Poisson variate: sequential inversion below mean 30, rounded normal
/// approximation above. Exact where rates are small, fast where fixtures are
/// large.
inline std::int64_t poisson_sample(double mean, std::mt19937_64& rng) {
    if (!(mean > 0.0)) return 0;
    if (mean < 30.0) {
        const double u = uniform01(rng);
        double p = std::exp(-mean);
        double cumulative = p;
        std::int64_t k = 0;
        while (u > cumulative && k < 1'000'000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cumulative += p;
        }
        return k;
    }
    const double draw = mean + std::sqrt(mean) * standard_normal(rng);
    return draw <= 0.0 ? 0 : static_cast<std::int64_t>(std::llround(draw));
}

/// Stable per-tag seed derivation (FNV-1a over the tag, then splitmix64).
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 14695981039346656037ull;
    for (const char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace covihawkes
