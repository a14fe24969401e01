#include <immintrin.h>

#include "q3/kernels.hpp"

namespace q3::kernels::detail {

namespace {

// Exact int64 -> double for 0 <= x < 2^52 (no native AVX2 conversion).
inline __m256d small_u64_to_pd(__m256i x) {
    const __m256i magic_bits = _mm256_set1_epi64x(0x4330000000000000LL);
    const __m256d magic = _mm256_set1_pd(0x1.0p52);
    return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(x, magic_bits)), magic);
}

void bin_index(const std::uint64_t* t, std::size_t n, std::int64_t origin, std::int64_t bin,
               std::int32_t* out) {
    const __m256i vorigin = _mm256_set1_epi64x(origin);
    const __m256d vbin = _mm256_set1_pd(static_cast<double>(bin));
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i vt = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(t + i));
        const __m256d x = small_u64_to_pd(_mm256_sub_epi64(vt, vorigin));
        __m256d q = _mm256_floor_pd(_mm256_div_pd(x, vbin));
        // The rounded quotient can land one off an exact integer boundary.
        const __m256d too_big = _mm256_cmp_pd(_mm256_mul_pd(q, vbin), x, _CMP_GT_OQ);
        q = _mm256_sub_pd(q, _mm256_and_pd(too_big, one));
        const __m256d too_small =
            _mm256_cmp_pd(_mm256_mul_pd(_mm256_add_pd(q, one), vbin), x, _CMP_LE_OQ);
        q = _mm256_add_pd(q, _mm256_and_pd(too_small, one));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(out + i), _mm256_cvttpd_epi32(q));
    }
    kScalar.bin_index(t + i, n - i, origin, bin, out + i);
}

inline __m256d norm(__m256d r, __m256d im) {
    return _mm256_add_pd(_mm256_mul_pd(r, r), _mm256_mul_pd(im, im));
}

void sorkin_epsilon(const double* const* re, const double* const* im, std::size_t n, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ar = _mm256_loadu_pd(re[0] + i), ai = _mm256_loadu_pd(im[0] + i);
        const __m256d br = _mm256_loadu_pd(re[1] + i), bi = _mm256_loadu_pd(im[1] + i);
        const __m256d cr = _mm256_loadu_pd(re[2] + i), ci = _mm256_loadu_pd(im[2] + i);
        const __m256d p_a = norm(ar, ai);
        const __m256d p_b = norm(br, bi);
        const __m256d p_c = norm(cr, ci);
        const __m256d abr = _mm256_add_pd(ar, br), abi = _mm256_add_pd(ai, bi);
        const __m256d acr = _mm256_add_pd(ar, cr), aci = _mm256_add_pd(ai, ci);
        const __m256d bcr = _mm256_add_pd(br, cr), bci = _mm256_add_pd(bi, ci);
        const __m256d p_ab = norm(abr, abi);
        const __m256d p_ac = norm(acr, aci);
        const __m256d p_bc = norm(bcr, bci);
        const __m256d p_abc = norm(_mm256_add_pd(abr, cr), _mm256_add_pd(abi, ci));
        const __m256d second = _mm256_sub_pd(_mm256_sub_pd(p_abc, p_ab), _mm256_add_pd(p_ac, p_bc));
        const __m256d first = _mm256_add_pd(_mm256_add_pd(p_a, p_b), p_c);
        _mm256_storeu_pd(out + i, _mm256_add_pd(second, first));
    }
    const double* re_tail[3] = {re[0] + i, re[1] + i, re[2] + i};
    const double* im_tail[3] = {im[0] + i, im[1] + i, im[2] + i};
    kScalar.sorkin_epsilon(re_tail, im_tail, n - i, out + i);
}

void offset_clamp(const std::uint64_t* t, const std::int64_t* off, std::size_t n, std::uint64_t upper,
                  std::uint64_t* out) {
    const __m256i zero = _mm256_setzero_si256();
    const __m256i hi = _mm256_set1_epi64x(static_cast<std::int64_t>(upper));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i vt = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(t + i));
        const __m256i vo = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(off + i));
        __m256i v = _mm256_add_epi64(vt, vo);
        v = _mm256_blendv_epi8(v, zero, _mm256_cmpgt_epi64(zero, v));
        v = _mm256_blendv_epi8(v, hi, _mm256_cmpgt_epi64(v, hi));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), v);
    }
    kScalar.offset_clamp(t + i, off + i, n - i, upper, out + i);
}

}  // namespace

const Table kAvx2{&bin_index, &sorkin_epsilon, &offset_clamp};

}  // namespace q3::kernels::detail
