#if defined(MEDGRAPH_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

#include "medgraph/kernels.hpp"

namespace medgraph::kernels::detail {
namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

// log2 of 4 positive normal doubles.
//
// Decompose x = 2^e * m with m in [1,2), shift m into [sqrt(2)/2, sqrt(2))
// so s = (m-1)/(m+1) stays small (|s| <= 0.172), then
//   log2(m) = (2/ln2) * s * (1 + z/3 + z^2/5 + ... + z^10/21),  z = s^2.
// The truncated atanh series is exact to well below double rounding at
// this |z| (next term < 2^-56).
__m256d log2_pd(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);

    __m256i bits = _mm256_castpd_si256(x);
    // Biased exponent as double via the 2^52 reinterpretation trick.
    __m256i eb = _mm256_srli_epi64(bits, 52);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(eb, magic)),
                              _mm256_set1_pd(0x1.0p52 + 1023.0));
    __m256d m = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

    // Center the mantissa around 1: m in [sqrt(2)/2, sqrt(2)).
    __m256d too_big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), too_big);
    e = _mm256_add_pd(e, _mm256_and_pd(too_big, one));

    __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    __m256d z = _mm256_mul_pd(s, s);

    __m256d q = _mm256_set1_pd(1.0 / 21.0);
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.0 / 19.0));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.0 / 17.0));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.0 / 15.0));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.0 / 13.0));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.0 / 11.0));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.0 / 9.0));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.0 / 7.0));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.0 / 5.0));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(1.0 / 3.0));
    q = _mm256_fmadd_pd(q, z, one);

    const __m256d two_over_ln2 = _mm256_set1_pd(2.8853900817779268);
    return _mm256_fmadd_pd(_mm256_mul_pd(two_over_ln2, s), q, e);
}

}  // namespace

double neg_plogp_sum_avx2(const double* v, std::size_t n, double vol) {
    if (vol <= 0.0) return 0.0;
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc_v = zero;
    __m256d acc_vlog = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d x = _mm256_loadu_pd(v + i);
        __m256d pos = _mm256_cmp_pd(x, zero, _CMP_GT_OQ);
        // Feed 1.0 through the log path in masked-out lanes to avoid NaNs.
        __m256d safe = _mm256_blendv_pd(one, x, pos);
        __m256d lg = log2_pd(safe);
        acc_v = _mm256_add_pd(acc_v, _mm256_and_pd(pos, x));
        acc_vlog = _mm256_add_pd(acc_vlog, _mm256_and_pd(pos, _mm256_mul_pd(x, lg)));
    }
    double sum_v = hsum(acc_v);
    double sum_vlog = hsum(acc_vlog);
    for (; i < n; ++i) {
        const double x = v[i];
        if (x > 0.0) {
            sum_v += x;
            sum_vlog += x * std::log2(x);
        }
    }
    return (sum_v * std::log2(vol) - sum_vlog) / vol;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace medgraph::kernels::detail

#endif  // MEDGRAPH_HAVE_AVX2
