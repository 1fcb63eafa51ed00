#pragma once

#include <cstdint>

namespace dehum {

// splitmix64: tiny, fast, and fully portable, so every pipeline stage that
// needs reproducible randomness derives from it rather than from
// implementation-defined std distributions.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Uniform in [0, bound). bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }
};

// Deterministic seed derivation for sub-streams (per run, per year, ...).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    SplitMix64 rng(seed ^ (0xA24BAED4963EE407ULL + salt * 0x9FB21C651E98DF25ULL));
    return rng.next();
}

} // namespace dehum
