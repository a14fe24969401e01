#include <atomic>
#include <cstdlib>
#include <string_view>

#include "q3/error.hpp"
#include "q3/kernels.hpp"

namespace q3::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(Q3_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa detect() noexcept {
    if (const char* env = std::getenv("Q3_SIMD")) {
        const std::string_view v(env);
        if (v == "scalar") return Isa::Scalar;
        if (v == "avx2" && cpu_has_avx2()) return Isa::Avx2;
    }
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int> g_forced{-1};

const detail::Table& table() noexcept {
    static const Isa detected = detect();
    const int forced = g_forced.load(std::memory_order_relaxed);
    const Isa isa = forced >= 0 ? static_cast<Isa>(forced) : detected;
#if defined(Q3_HAVE_AVX2_KERNELS)
    if (isa == Isa::Avx2) return detail::kAvx2;
#endif
    (void)isa;
    return detail::kScalar;
}

}  // namespace

const char* to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept {
    return isa == Isa::Scalar || (isa == Isa::Avx2 && cpu_has_avx2());
}

Isa active_isa() noexcept { return &table() == &detail::kScalar ? Isa::Scalar : Isa::Avx2; }

void force_isa(Isa isa) {
    if (!isa_available(isa))
        fail(ErrorKind::Configuration, std::string("kernel variant '") + to_string(isa) +
                                           "' is not supported on this CPU");
    g_forced.store(static_cast<int>(isa), std::memory_order_relaxed);
}

void reset_isa() noexcept { g_forced.store(-1, std::memory_order_relaxed); }

void bin_index(std::span<const std::uint64_t> t, std::int64_t origin, std::int64_t bin,
               std::span<std::int32_t> out) {
    if (out.size() < t.size()) fail(ErrorKind::Parameter, "bin_index output too small");
    if (bin <= 0) fail(ErrorKind::Parameter, "bin width must be > 0");
    table().bin_index(t.data(), t.size(), origin, bin, out.data());
}

void sorkin_epsilon_batch(const AmplitudeTriples& a, std::span<double> out) {
    const std::size_t n = a.size();
    for (int p = 0; p < 3; ++p)
        if (a.re[p].size() != n || a.im[p].size() != n)
            fail(ErrorKind::Parameter, "amplitude columns differ in length");
    if (out.size() < n) fail(ErrorKind::Parameter, "sorkin_epsilon_batch output too small");
    const double* re[3] = {a.re[0].data(), a.re[1].data(), a.re[2].data()};
    const double* im[3] = {a.im[0].data(), a.im[1].data(), a.im[2].data()};
    table().sorkin_epsilon(re, im, n, out.data());
}

void offset_clamp(std::span<const std::uint64_t> t, std::span<const std::int64_t> offset,
                  std::uint64_t upper, std::span<std::uint64_t> out) {
    if (offset.size() != t.size() || out.size() < t.size())
        fail(ErrorKind::Parameter, "offset_clamp spans differ in length");
    table().offset_clamp(t.data(), offset.data(), t.size(), upper, out.data());
}

}  // namespace q3::kernels
