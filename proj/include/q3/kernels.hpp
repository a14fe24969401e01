#pragma once

// Data-parallel inner loops with a scalar reference and vector variants.
// The variant is picked once at runtime from CPU support; the environment
// variable Q3_SIMD=scalar|avx2 or force_isa() overrides it. Every variant
// returns results bit-identical to the scalar reference.

#include <cstdint>
#include <span>

namespace q3::kernels {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;
Isa active_isa() noexcept;
/// Throws a configuration error when `isa` is not supported here.
void force_isa(Isa isa);
/// Back to automatic selection.
void reset_isa() noexcept;

/// Amplitude triples stored column-wise: re[p][i], im[p][i] for path p.
struct AmplitudeTriples {
    std::span<const double> re[3];
    std::span<const double> im[3];
    std::size_t size() const noexcept { return re[0].size(); }
};

/// out[i] = (t[i] - origin) / bin, rounded down. Requires
/// origin <= t[i] < origin + 2^52 and a quotient that fits in int32.
/// Requires 0 <= t[i] - origin < 2^52 and bin > 0.
void bin_index(std::span<const std::uint64_t> t, std::int64_t origin, std::int64_t bin,
               std::span<std::int32_t> out);

/// Third-order interference term of exact Born probabilities
/// P_X = |sum_{p in X} a_p|^2 for every triple. Analytically zero.
void sorkin_epsilon_batch(const AmplitudeTriples& a, std::span<double> out);

/// out[i] = clamp(t[i] + offset[i], 0, upper).
void offset_clamp(std::span<const std::uint64_t> t, std::span<const std::int64_t> offset,
                  std::uint64_t upper, std::span<std::uint64_t> out);

namespace detail {

struct Table {
    void (*bin_index)(const std::uint64_t*, std::size_t, std::int64_t, std::int64_t, std::int32_t*);
    void (*sorkin_epsilon)(const double* const*, const double* const*, std::size_t, double*);
    void (*offset_clamp)(const std::uint64_t*, const std::int64_t*, std::size_t, std::uint64_t,
                         std::uint64_t*);
};

extern const Table kScalar;
#if defined(Q3_HAVE_AVX2_KERNELS)
extern const Table kAvx2;
#endif

}  // namespace detail
}  // namespace q3::kernels
