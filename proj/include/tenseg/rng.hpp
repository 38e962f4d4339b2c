#pragma once

#include <cstdint>
#include <random>

namespace tenseg {

// Deterministic uniform generator. The bit-to-double conversion is done by
// hand because std::uniform_real_distribution is implementation-defined and
// would break byte-identical reproducibility across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t raw() { return gen_(); }

    // independent stream for (seed, index) pairs, e.g. one per episode
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        // splitmix64 of the combined value
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace tenseg
