#pragma once

#include <cstdint>

namespace q3 {

/// SplitMix64 step. Used to derive substream seeds and to expand a 64-bit
/// seed into generator state.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Well-known stream ids. Each stochastic stage draws from its own
/// substream so that changing one stage never perturbs another.
enum class Stream : std::uint64_t {
    Signal = 1,
    Background = 2,
    Circuit = 3,
    Filter = 4,
    Thinning = 5,
    Dark = 6,
    Jitter = 7,
    Fabrication = 8,
    Probe = 9,
    Bootstrap = 10,
};

/// xoshiro256** generator (Blackman & Vigna) seeded through SplitMix64.
///
/// The state evolution and every distribution below are implemented here
/// rather than taken from <random>, whose distributions are not specified
/// bit-for-bit across standard libraries. A substream is keyed by
/// (seed, stream id[, index]); two different keys give statistically
/// independent sequences.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;
    Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) noexcept;
    Rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept
        : Rng(seed, static_cast<std::uint64_t>(stream), index) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
    /// Uniform on (0, 1].
    double uniform_pos() noexcept { return 1.0 - uniform(); }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Exponential with the given rate (mean 1/rate).
    double exponential(double rate) noexcept;
    /// Standard normal by the Box-Muller transform; the second variate is cached.
    double normal() noexcept;
    /// Poisson variate; inversion for small means, PTRS rejection otherwise.
    std::uint64_t poisson(double mean) noexcept;
    bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace q3
