#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace swarmtrack {

/// Seeded random stream with portable uniform/gaussian draws.
///
/// std::mt19937_64 output is fully specified by the standard, and the
/// transforms below avoid std::*_distribution, whose sequences differ
/// between standard library implementations. Identical seeds therefore
/// give identical draws on every platform, which the reproducibility
/// guarantees rely on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream derived from (seed, stream id) via splitmix64.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return Rng(z);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (no cached second value).
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double gaussian(double mean, double sigma) {
        return mean + sigma * gaussian();
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace swarmtrack
