// AVX2 lane. Mirrors the scalar reference kernels operation-for-operation:
// same rationals, same evaluation order, no FMA, so results are bit-identical
// to the scalar lane (asserted by the equivalence tests). Compiled with
// -mavx2 and only reached behind the runtime cpuid check in the dispatcher.

#include "kernels_internal.hpp"

#if defined(BPJ_HAVE_AVX2_LANE)

#include <immintrin.h>

#include <cstdint>
#include <limits>

#include "kernel_tables.hpp"

namespace bpj::kernels::avx2 {

namespace {

using namespace tables;

inline __m256d vset(double x) { return _mm256_set1_pd(x); }

inline __m256d vabs(__m256d x) {
    return _mm256_andnot_pd(vset(-0.0), x);
}

// small non-negative integers held in the low 52 bits of each lane -> double
inline __m256d small_uint_to_pd(__m256i v) {
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);  // 2^52
    __m256d d = _mm256_castsi256_pd(_mm256_or_si256(v, magic));
    return _mm256_sub_pd(d, _mm256_castsi256_pd(magic));
}

inline __m256d exp4(__m256d x_in) {
    const __m256d max_x = vset(EXP_MAX_X);
    const __m256d min_x = vset(EXP_MIN_X);
    __m256d x = _mm256_min_pd(_mm256_max_pd(x_in, min_x), max_x);

    __m256d n = _mm256_floor_pd(_mm256_add_pd(_mm256_mul_pd(vset(LOG2E), x), vset(0.5)));
    __m256d px = _mm256_sub_pd(x, _mm256_mul_pd(n, vset(EXP_C1)));
    px = _mm256_sub_pd(px, _mm256_mul_pd(n, vset(EXP_C2)));
    __m256d xx = _mm256_mul_pd(px, px);
    __m256d p = _mm256_add_pd(_mm256_mul_pd(vset(EXP_P[0]), xx), vset(EXP_P[1]));
    p = _mm256_add_pd(_mm256_mul_pd(p, xx), vset(EXP_P[2]));
    p = _mm256_mul_pd(px, p);
    __m256d q = _mm256_add_pd(_mm256_mul_pd(vset(EXP_Q[0]), xx), vset(EXP_Q[1]));
    q = _mm256_add_pd(_mm256_mul_pd(q, xx), vset(EXP_Q[2]));
    q = _mm256_add_pd(_mm256_mul_pd(q, xx), vset(EXP_Q[3]));
    __m256d e = _mm256_add_pd(vset(1.0),
                              _mm256_div_pd(_mm256_add_pd(p, p), _mm256_sub_pd(q, p)));

    // 2^n through the exponent field; n is in [-1021, 1023] after the clamp
    __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i n64 = _mm256_cvtepi32_epi64(n32);
    __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    __m256d two_n = _mm256_castsi256_pd(bits);
    __m256d r = _mm256_mul_pd(e, two_n);

    r = _mm256_blendv_pd(r, _mm256_setzero_pd(), _mm256_cmp_pd(x_in, min_x, _CMP_LT_OQ));
    r = _mm256_blendv_pd(r, vset(std::numeric_limits<double>::infinity()),
                         _mm256_cmp_pd(x_in, max_x, _CMP_GT_OQ));
    return r;
}

inline __m256d log4(__m256d x) {
    // precondition: every lane positive and normal
    __m256i bits = _mm256_castpd_si256(x);
    __m256i ebits = _mm256_srli_epi64(bits, 52);
    __m256d e = _mm256_sub_pd(small_uint_to_pd(ebits), vset(1022.0));
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i half_expo = _mm256_set1_epi64x(0x3FE0000000000000LL);
    __m256d m = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_expo));
    __m256d below = _mm256_cmp_pd(m, vset(LOG_SQRTH), _CMP_LT_OQ);
    m = _mm256_blendv_pd(m, _mm256_add_pd(m, m), below);
    e = _mm256_blendv_pd(e, _mm256_sub_pd(e, vset(1.0)), below);

    __m256d xm = _mm256_sub_pd(m, vset(1.0));
    __m256d z = _mm256_mul_pd(xm, xm);
    __m256d num = vset(LOG_P[0]);
    for (int i = 1; i < 6; ++i) num = _mm256_add_pd(_mm256_mul_pd(num, xm), vset(LOG_P[i]));
    __m256d den = _mm256_add_pd(xm, vset(LOG_Q[0]));
    for (int i = 1; i < 5; ++i) den = _mm256_add_pd(_mm256_mul_pd(den, xm), vset(LOG_Q[i]));
    __m256d y = _mm256_mul_pd(xm, _mm256_div_pd(_mm256_mul_pd(z, num), den));
    y = _mm256_sub_pd(y, _mm256_mul_pd(e, vset(LOG_LN2_LO)));
    y = _mm256_sub_pd(y, _mm256_mul_pd(vset(0.5), z));
    __m256d r = _mm256_add_pd(xm, y);
    r = _mm256_add_pd(r, _mm256_mul_pd(e, vset(LOG_LN2_HI)));
    return r;
}

inline __m256d pow4(__m256d base, __m256d expo) {
    return exp4(_mm256_mul_pd(expo, log4(base)));
}

inline __m256d erfc4(__m256d x) {
    const __m256d y = vabs(x);

    // region 1: |x| <= 0.46875, via erf rational in x^2
    __m256d ysq1 = _mm256_mul_pd(y, y);
    ysq1 = _mm256_blendv_pd(ysq1, _mm256_setzero_pd(),
                            _mm256_cmp_pd(y, vset(ERFC_XSMALL), _CMP_LE_OQ));
    __m256d xnum1 = _mm256_mul_pd(vset(ERF_A[4]), ysq1);
    __m256d xden1 = ysq1;
    for (int i = 0; i < 3; ++i) {
        xnum1 = _mm256_mul_pd(_mm256_add_pd(xnum1, vset(ERF_A[i])), ysq1);
        xden1 = _mm256_mul_pd(_mm256_add_pd(xden1, vset(ERF_B[i])), ysq1);
    }
    __m256d erf = _mm256_div_pd(_mm256_mul_pd(x, _mm256_add_pd(xnum1, vset(ERF_A[3]))),
                                _mm256_add_pd(xden1, vset(ERF_B[3])));
    __m256d r1 = _mm256_sub_pd(vset(1.0), erf);

    // region 2: 0.46875 < |x| <= 4
    __m256d xnum2 = _mm256_mul_pd(vset(ERFC_C[8]), y);
    __m256d xden2 = y;
    for (int i = 0; i < 7; ++i) {
        xnum2 = _mm256_mul_pd(_mm256_add_pd(xnum2, vset(ERFC_C[i])), y);
        xden2 = _mm256_mul_pd(_mm256_add_pd(xden2, vset(ERFC_D[i])), y);
    }
    __m256d r2 = _mm256_div_pd(_mm256_add_pd(xnum2, vset(ERFC_C[7])),
                               _mm256_add_pd(xden2, vset(ERFC_D[7])));

    // region 3: |x| > 4
    __m256d ysq3 = _mm256_div_pd(vset(1.0), _mm256_mul_pd(y, y));
    __m256d xnum3 = _mm256_mul_pd(vset(ERFC_P[5]), ysq3);
    __m256d xden3 = ysq3;
    for (int i = 0; i < 4; ++i) {
        xnum3 = _mm256_mul_pd(_mm256_add_pd(xnum3, vset(ERFC_P[i])), ysq3);
        xden3 = _mm256_mul_pd(_mm256_add_pd(xden3, vset(ERFC_Q[i])), ysq3);
    }
    __m256d r3 = _mm256_div_pd(_mm256_mul_pd(ysq3, _mm256_add_pd(xnum3, vset(ERFC_P[4]))),
                               _mm256_add_pd(xden3, vset(ERFC_Q[4])));
    r3 = _mm256_div_pd(_mm256_sub_pd(vset(ONE_OVER_SQRTPI), r3), y);

    __m256d in2 = _mm256_cmp_pd(y, vset(4.0), _CMP_LE_OQ);
    __m256d result = _mm256_blendv_pd(r3, r2, in2);
    result = _mm256_blendv_pd(result, _mm256_setzero_pd(),
                              _mm256_cmp_pd(y, vset(ERFC_XBIG), _CMP_GE_OQ));

    // shared exponential tail for both outer regions
    __m256d yhi = _mm256_div_pd(
        _mm256_round_pd(_mm256_mul_pd(y, vset(16.0)), _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC),
        vset(16.0));
    __m256d del = _mm256_mul_pd(_mm256_sub_pd(y, yhi), _mm256_add_pd(y, yhi));
    __m256d tail = _mm256_mul_pd(exp4(_mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(yhi, yhi))),
                                 exp4(_mm256_sub_pd(_mm256_setzero_pd(), del)));
    __m256d outer = _mm256_andnot_pd(
        _mm256_cmp_pd(y, vset(ERFC_XBIG), _CMP_GE_OQ),
        _mm256_cmp_pd(y, vset(ERFC_THRESH), _CMP_GT_OQ));
    result = _mm256_blendv_pd(result, _mm256_mul_pd(tail, result), outer);

    // region 1 lanes and the negative-x reflection
    result = _mm256_blendv_pd(result, r1, _mm256_cmp_pd(y, vset(ERFC_THRESH), _CMP_LE_OQ));
    __m256d neg = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ);
    __m256d reflected = _mm256_sub_pd(vset(2.0), result);
    // region 1 already carries the sign through erf(x)
    __m256d outer_neg = _mm256_andnot_pd(_mm256_cmp_pd(y, vset(ERFC_THRESH), _CMP_LE_OQ), neg);
    result = _mm256_blendv_pd(result, reflected, outer_neg);
    return result;
}

inline __m256d efficiency4(__m256d alpha, __m256d beta, __m256d expo, __m256d floor_term,
                           __m256d g) {
    __m256d s = _mm256_sqrt_pd(_mm256_mul_pd(beta, g));
    __m256d q = _mm256_mul_pd(vset(0.5), erfc4(_mm256_mul_pd(s, vset(INV_SQRT2))));
    __m256d u = _mm256_sub_pd(vset(1.0), _mm256_mul_pd(alpha, q));
    __m256d r = _mm256_sub_pd(pow4(u, expo), floor_term);
    return _mm256_blendv_pd(r, _mm256_setzero_pd(),
                            _mm256_cmp_pd(g, _mm256_setzero_pd(), _CMP_EQ_OQ));
}

}  // namespace

void erfc_batch(std::span<const double> x, std::span<double> out) {
    std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out.data() + i, erfc4(_mm256_loadu_pd(x.data() + i)));
    for (; i < n; ++i) out[i] = erfc_core(x[i]);
}

void exp_batch(std::span<const double> x, std::span<double> out) {
    std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out.data() + i, exp4(_mm256_loadu_pd(x.data() + i)));
    for (; i < n; ++i) out[i] = exp_core(x[i]);
}

void efficiency_batch(double alpha, double beta, double expo, double floor_term,
                      std::span<const double> gamma, std::span<double> out) {
    const __m256d a = vset(alpha), be = vset(beta), ex = vset(expo), fl = vset(floor_term);
    std::size_t n = gamma.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out.data() + i,
                         efficiency4(a, be, ex, fl, _mm256_loadu_pd(gamma.data() + i)));
    for (; i < n; ++i) out[i] = efficiency_point(alpha, beta, expo, floor_term, gamma[i]);
}

}  // namespace bpj::kernels::avx2

#endif  // BPJ_HAVE_AVX2_LANE
