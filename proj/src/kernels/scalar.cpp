#include "q3/kernels.hpp"

namespace q3::kernels::detail {

namespace {

void bin_index(const std::uint64_t* t, std::size_t n, std::int64_t origin, std::int64_t bin,
               std::int32_t* out) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<std::int32_t>((static_cast<std::int64_t>(t[i]) - origin) / bin);
}

void sorkin_epsilon(const double* const* re, const double* const* im, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = re[0][i], ai = im[0][i];
        const double br = re[1][i], bi = im[1][i];
        const double cr = re[2][i], ci = im[2][i];
        const double p_a = ar * ar + ai * ai;
        const double p_b = br * br + bi * bi;
        const double p_c = cr * cr + ci * ci;
        const double abr = ar + br, abi = ai + bi;
        const double acr = ar + cr, aci = ai + ci;
        const double bcr = br + cr, bci = bi + ci;
        const double p_ab = abr * abr + abi * abi;
        const double p_ac = acr * acr + aci * aci;
        const double p_bc = bcr * bcr + bci * bci;
        const double abcr = abr + cr, abci = abi + ci;
        const double p_abc = abcr * abcr + abci * abci;
        out[i] = ((p_abc - p_ab) - (p_ac + p_bc)) + ((p_a + p_b) + p_c);
    }
}

void offset_clamp(const std::uint64_t* t, const std::int64_t* off, std::size_t n, std::uint64_t upper,
                  std::uint64_t* out) {
    const auto hi = static_cast<std::int64_t>(upper);
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t v = static_cast<std::int64_t>(t[i]) + off[i];
        if (v < 0) v = 0;
        if (v > hi) v = hi;
        out[i] = static_cast<std::uint64_t>(v);
    }
}

}  // namespace

const Table kScalar{&bin_index, &sorkin_epsilon, &offset_clamp};

}  // namespace q3::kernels::detail
