#include "rsde/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <vector>

// AVX2+FMA variants. vpow uses a hand-rolled vector pow (atanh-series log with
// a split ln2 reduction, degree-13 Taylor exp) accurate to a few ulp over the
// strictly positive range the callers use; equivalence against std::pow is
// enforced by the kernel tests.
namespace rsde::kernels {
namespace {

const __m256d ONE = _mm256_set1_pd(1.0);

// ln2 split so that e * LN2_HI is exact for |e| < 2^31.
const double LN2_HI = 6.93147180369123816490e-01;
const double LN2_LO = 1.90821492927058770002e-10;
const double INV_LN2 = 1.44269504088896338700e+00;
const double SQRT2 = 1.41421356237309514547;

// 1/3, 1/5, ..., 1/21 for atanh(s) = s + s^3/3 + ...
const double ATANH_C[10] = {
    1.0 / 3.0,  1.0 / 5.0,  1.0 / 7.0,  1.0 / 9.0,  1.0 / 11.0,
    1.0 / 13.0, 1.0 / 15.0, 1.0 / 17.0, 1.0 / 19.0, 1.0 / 21.0,
};

// 1/2!, ..., 1/13! for exp.
const double EXP_C[12] = {
    1.0 / 2.0,          1.0 / 6.0,           1.0 / 24.0,          1.0 / 120.0,
    1.0 / 720.0,        1.0 / 5040.0,        1.0 / 40320.0,       1.0 / 362880.0,
    1.0 / 3628800.0,    1.0 / 39916800.0,    1.0 / 479001600.0,   1.0 / 6227020800.0,
};

// double(int64) for |k| < 2^51.
inline __m256d i64_to_pd(__m256i k) {
    const __m256i magic = _mm256_set1_epi64x(0x4338000000000000LL);
    __m256d d = _mm256_castsi256_pd(_mm256_add_epi64(k, magic));
    return _mm256_sub_pd(d, _mm256_set1_pd(0x1.8p52));
}

// 2^k as a double for moderate k.
inline __m256d exp2i(__m256i k) {
    __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k, _mm256_set1_epi64x(1023)), 52);
    return _mm256_castsi256_pd(bits);
}

// x^p for 4 strictly positive finite lanes.
inline __m256d pow4(__m256d x, double p) {
    // x = 2^e * m, m in [sqrt2/2, sqrt2)
    __m256i bits = _mm256_castpd_si256(x);
    __m256i e_raw = _mm256_srli_epi64(bits, 52);
    e_raw = _mm256_and_si256(e_raw, _mm256_set1_epi64x(0x7FF));
    __m256i e_i = _mm256_sub_epi64(e_raw, _mm256_set1_epi64x(1023));
    __m256i man = _mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
        _mm256_set1_epi64x(0x3FF0000000000000LL));
    __m256d m = _mm256_castsi256_pd(man);
    __m256d ge = _mm256_cmp_pd(m, _mm256_set1_pd(SQRT2), _CMP_GE_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), ge);
    e_i = _mm256_sub_epi64(e_i, _mm256_castpd_si256(ge)); // mask lanes are -1
    __m256d e = i64_to_pd(e_i);

    // ln m via atanh series; m-1 is exact here (Sterbenz).
    __m256d s = _mm256_div_pd(_mm256_sub_pd(m, ONE), _mm256_add_pd(m, ONE));
    __m256d w = _mm256_mul_pd(s, s);
    __m256d q = _mm256_set1_pd(ATANH_C[9]);
    for (int i = 8; i >= 0; --i)
        q = _mm256_fmadd_pd(q, w, _mm256_set1_pd(ATANH_C[i]));
    __m256d two_s = _mm256_add_pd(s, s);
    __m256d lnm_lead = two_s;
    __m256d lnm_tail = _mm256_mul_pd(_mm256_mul_pd(two_s, w), q);

    // ln x = e*LN2_HI + lnm_lead (two-sum) + low-order parts
    __m256d t = _mm256_mul_pd(e, _mm256_set1_pd(LN2_HI)); // exact
    __m256d hi = _mm256_add_pd(t, lnm_lead);
    __m256d vb = _mm256_sub_pd(hi, t);
    __m256d lo = _mm256_add_pd(_mm256_sub_pd(t, _mm256_sub_pd(hi, vb)),
                               _mm256_sub_pd(lnm_lead, vb));
    lo = _mm256_add_pd(lo, _mm256_fmadd_pd(e, _mm256_set1_pd(LN2_LO), lnm_tail));

    // y = p * ln x, product tail recovered with FMA
    __m256d vp = _mm256_set1_pd(p);
    __m256d y = _mm256_mul_pd(vp, hi);
    __m256d y_lo = _mm256_fmadd_pd(vp, hi, _mm256_sub_pd(_mm256_setzero_pd(), y));
    y_lo = _mm256_fmadd_pd(vp, lo, y_lo);

    // exp(y + y_lo)
    __m256d kf = _mm256_round_pd(_mm256_mul_pd(y, _mm256_set1_pd(INV_LN2)),
                                 _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(kf, _mm256_set1_pd(LN2_HI), y);
    r = _mm256_fnmadd_pd(kf, _mm256_set1_pd(LN2_LO), r);
    r = _mm256_add_pd(r, y_lo);
    __m256d pe = _mm256_set1_pd(EXP_C[11]);
    for (int i = 10; i >= 0; --i)
        pe = _mm256_fmadd_pd(pe, r, _mm256_set1_pd(EXP_C[i]));
    __m256d er = _mm256_fmadd_pd(_mm256_mul_pd(pe, r), r, _mm256_add_pd(r, ONE));
    __m128i k32 = _mm256_cvtpd_epi32(kf);
    __m256i k64 = _mm256_cvtepi32_epi64(k32);
    return _mm256_mul_pd(er, exp2i(k64));
}

void vpow_avx2(const double* x, double* out, std::size_t n, double p) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        // positivity/finiteness guard: fall back to std::pow lane-wise if violated
        __m256d ok = _mm256_and_pd(
            _mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_GT_OQ),
            _mm256_cmp_pd(v, _mm256_set1_pd(0x1.0p1020), _CMP_LT_OQ));
        if (_mm256_movemask_pd(ok) != 0xF) {
            for (int l = 0; l < 4; ++l)
                out[i + l] = std::pow(x[i + l], p);
            continue;
        }
        _mm256_storeu_pd(out + i, pow4(v, p));
    }
    for (; i < n; ++i)
        out[i] = std::pow(x[i], p);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
        s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), s2);
        s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), s3);
    }
    for (; i + 4 <= n; i += 4)
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    __m256d s = _mm256_add_pd(_mm256_add_pd(s0, s2), _mm256_add_pd(s1, s3));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, s);
    double r = ((lanes[0] + lanes[2]) + (lanes[1] + lanes[3]));
    for (; i < n; ++i)
        r += a[i] * b[i];
    return r;
}

void power_sums_avx2(const double* x, std::size_t n, int pmax, Accum* sums) {
    // 4-lane compensated accumulators per power, merged in fixed lane order.
    constexpr int MAX_P = 16;
    if (pmax > MAX_P) {
        detail::scalar_vtable.power_sums(x, n, pmax, sums);
        return;
    }
    __m256d lane_sum[MAX_P], lane_comp[MAX_P];
    for (int j = 0; j < pmax; ++j)
        lane_sum[j] = lane_comp[j] = _mm256_setzero_pd();
    const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        __m256d pw = ONE;
        for (int j = 0; j < pmax; ++j) {
            pw = _mm256_mul_pd(pw, v);
            __m256d s = lane_sum[j];
            __m256d t = _mm256_add_pd(s, pw);
            __m256d big = _mm256_cmp_pd(_mm256_and_pd(s, absmask),
                                        _mm256_and_pd(pw, absmask), _CMP_GE_OQ);
            __m256d corr_s = _mm256_add_pd(_mm256_sub_pd(s, t), pw);
            __m256d corr_v = _mm256_add_pd(_mm256_sub_pd(pw, t), s);
            lane_comp[j] = _mm256_add_pd(lane_comp[j], _mm256_blendv_pd(corr_v, corr_s, big));
            lane_sum[j] = t;
        }
    }
    alignas(32) double ls[4], lc[4];
    for (int j = 0; j < pmax; ++j) {
        _mm256_store_pd(ls, lane_sum[j]);
        _mm256_store_pd(lc, lane_comp[j]);
        for (int l = 0; l < 4; ++l) {
            sums[j].add(ls[l]);
            sums[j].comp += lc[l];
        }
    }
    for (; i < n; ++i) {
        double pw = 1.0;
        for (int j = 0; j < pmax; ++j) {
            pw *= x[i];
            sums[j].add(pw);
        }
    }
}

double energy_cross_sum_avx2(const double* a, std::size_t na, const double* b,
                             std::size_t nb, std::size_t dim) {
    // Column-major copy of b so the inner loop reads contiguously.
    std::vector<double> bc(nb * dim);
    for (std::size_t j = 0; j < nb; ++j)
        for (std::size_t c = 0; c < dim; ++c)
            bc[c * nb + j] = b[j * dim + c];

    Accum rows;
    for (std::size_t i = 0; i < na; ++i) {
        const double* ai = a + i * dim;
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= nb; j += 4) {
            __m256d d2 = _mm256_setzero_pd();
            for (std::size_t c = 0; c < dim; ++c) {
                __m256d d = _mm256_sub_pd(_mm256_set1_pd(ai[c]),
                                          _mm256_loadu_pd(&bc[c * nb + j]));
                d2 = _mm256_fmadd_pd(d, d, d2);
            }
            acc = _mm256_add_pd(acc, _mm256_sqrt_pd(d2));
        }
        alignas(32) double lanes[4];
        _mm256_store_pd(lanes, acc);
        double row = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
        for (; j < nb; ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double d = ai[c] - bc[c * nb + j];
                d2 += d * d;
            }
            row += std::sqrt(d2);
        }
        rows.add(row);
    }
    return rows.value();
}

} // namespace

namespace detail {
const Vtable avx2_vtable = {vpow_avx2, dot_avx2, power_sums_avx2, energy_cross_sum_avx2};
} // namespace detail

} // namespace rsde::kernels
