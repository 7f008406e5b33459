// AVX2+FMA lane. Compiled with -mavx2 -mfma on x86-64 only; selected at
// runtime after a cpuid check (see kernels.cpp).

#if defined(__x86_64__) || defined(__i386__)

#include "slowenv/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace slowenv::kernels {
namespace {

// ---------------------------------------------------------------- reductions

double k_sum(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    __m256d acc = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d s2 = _mm_add_pd(lo, hi);
    double s = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
    for (; i < n; ++i) s += a[i];
    return s;
}

double k_dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    __m256d acc = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d s2 = _mm_add_pd(lo, hi);
    double s = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

// --------------------------------------------------------------- elementwise

void k_mul(double* y, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] *= x[i];
}

void k_scale(double* y, double c, std::size_t n) {
    __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), vc));
    for (; i < n; ++i) y[i] *= c;
}

void k_axpy(double* y, double a, const double* x, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void k_cmul_factors(double* c, const double* f, std::size_t npairs) {
    std::size_t i = 0;
    for (; i + 4 <= npairs; i += 4) {
        __m256d vf = _mm256_loadu_pd(f + i);
        __m256d f01 = _mm256_permute4x64_pd(vf, 0x50);  // f0 f0 f1 f1
        __m256d f23 = _mm256_permute4x64_pd(vf, 0xFA);  // f2 f2 f3 f3
        _mm256_storeu_pd(c + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(c + 2 * i), f01));
        _mm256_storeu_pd(c + 2 * i + 4, _mm256_mul_pd(_mm256_loadu_pd(c + 2 * i + 4), f23));
    }
    for (; i < npairs; ++i) {
        c[2 * i] *= f[i];
        c[2 * i + 1] *= f[i];
    }
}

// ------------------------------------------------------------------ exp, log

// exp via round-to-nearest ln2 range reduction plus a degree-13 Taylor
// polynomial on |r| <= ln2/2, then scaling by 2^n applied in two halves so
// extreme arguments overflow/underflow through ordinary double arithmetic.
// Valid for finite input; accuracy ~2 ulp (equivalence-tested in
// tests/unit/test_kernels.cpp).

const double kMagic = 6755399441055744.0;  // 1.5 * 2^52

inline __m256d pow2_int(__m256d k) {
    // k integral, |k| <= ~1100: build 2^k from exponent bits
    __m256i ki = _mm256_sub_epi64(
        _mm256_castpd_si256(_mm256_add_pd(k, _mm256_set1_pd(kMagic))),
        _mm256_castpd_si256(_mm256_set1_pd(kMagic)));
    __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
    return _mm256_castsi256_pd(bits);
}

inline __m256d exp_core(__m256d x) {
    x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-746.0)), _mm256_set1_pd(710.0));

    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

    __m256d nf = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                 _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(nf, ln2_hi, x);
    r = _mm256_fnmadd_pd(nf, ln2_lo, r);

    __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    __m256d n1 = _mm256_round_pd(_mm256_mul_pd(nf, _mm256_set1_pd(0.5)),
                                 _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d n2 = _mm256_sub_pd(nf, n1);
    return _mm256_mul_pd(_mm256_mul_pd(p, pow2_int(n1)), pow2_int(n2));
}

void k_exp_fill(double* dst, const double* src, double c, std::size_t n) {
    __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, exp_core(_mm256_mul_pd(vc, _mm256_loadu_pd(src + i))));
    for (; i < n; ++i) dst[i] = std::exp(c * src[i]);
}

// log via exponent extraction and 2*atanh((m-1)/(m+1)) with m in
// [sqrt(2)/2, sqrt(2)). Requires normal positive input.

inline __m256d log_core(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    __m256i bits = _mm256_castpd_si256(x);
    __m256i expo = _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(1023));
    __m256d e = _mm256_sub_pd(
        _mm256_castsi256_pd(_mm256_add_epi64(
            expo, _mm256_castpd_si256(_mm256_set1_pd(kMagic)))),
        _mm256_set1_pd(kMagic));

    __m256i mant = _mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
        _mm256_castpd_si256(one));
    __m256d m = _mm256_castsi256_pd(mant);

    __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    e = _mm256_sub_pd(e, _mm256_and_pd(big, _mm256_set1_pd(-1.0)));

    __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    __m256d z = _mm256_mul_pd(s, s);

    __m256d p = _mm256_set1_pd(2.0 / 21.0);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 19.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 17.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 15.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 13.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 11.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 9.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 7.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 5.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 3.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0));
    __m256d logm = _mm256_mul_pd(p, s);

    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    __m256d res = _mm256_fmadd_pd(e, ln2_lo, logm);
    return _mm256_fmadd_pd(e, ln2_hi, res);
}

void k_log_fill(double* dst, const double* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(dst + i, log_core(_mm256_loadu_pd(src + i)));
    for (; i < n; ++i) dst[i] = std::log(src[i]);
}

// --------------------------------------------------------------- min / max

void k_minmax(const double* a, std::size_t n, double* lo, double* hi) {
    double mn, mx;
    if (n >= 4) {
        __m256d vmn = _mm256_loadu_pd(a);
        __m256d vmx = vmn;
        std::size_t i = 4;
        for (; i + 4 <= n; i += 4) {
            __m256d v = _mm256_loadu_pd(a + i);
            vmn = _mm256_min_pd(vmn, v);
            vmx = _mm256_max_pd(vmx, v);
        }
        __m128d mn2 = _mm_min_pd(_mm256_castpd256_pd128(vmn), _mm256_extractf128_pd(vmn, 1));
        __m128d mx2 = _mm_max_pd(_mm256_castpd256_pd128(vmx), _mm256_extractf128_pd(vmx, 1));
        mn = _mm_cvtsd_f64(_mm_min_sd(mn2, _mm_unpackhi_pd(mn2, mn2)));
        mx = _mm_cvtsd_f64(_mm_max_sd(mx2, _mm_unpackhi_pd(mx2, mx2)));
        for (; i < n; ++i) {
            if (a[i] < mn) mn = a[i];
            if (a[i] > mx) mx = a[i];
        }
    } else {
        mn = mx = a[0];
        for (std::size_t i = 1; i < n; ++i) {
            if (a[i] < mn) mn = a[i];
            if (a[i] > mx) mx = a[i];
        }
    }
    *lo = mn;
    *hi = mx;
}

void k_minmax_diff(const double* a, const double* b, std::size_t n, double* lo, double* hi) {
    double mn, mx;
    if (n >= 4) {
        __m256d vmn = _mm256_sub_pd(_mm256_loadu_pd(a), _mm256_loadu_pd(b));
        __m256d vmx = vmn;
        std::size_t i = 4;
        for (; i + 4 <= n; i += 4) {
            __m256d v = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
            vmn = _mm256_min_pd(vmn, v);
            vmx = _mm256_max_pd(vmx, v);
        }
        __m128d mn2 = _mm_min_pd(_mm256_castpd256_pd128(vmn), _mm256_extractf128_pd(vmn, 1));
        __m128d mx2 = _mm_max_pd(_mm256_castpd256_pd128(vmx), _mm256_extractf128_pd(vmx, 1));
        mn = _mm_cvtsd_f64(_mm_min_sd(mn2, _mm_unpackhi_pd(mn2, mn2)));
        mx = _mm_cvtsd_f64(_mm_max_sd(mx2, _mm_unpackhi_pd(mx2, mx2)));
        for (; i < n; ++i) {
            double d = a[i] - b[i];
            if (d < mn) mn = d;
            if (d > mx) mx = d;
        }
    } else {
        mn = mx = a[0] - b[0];
        for (std::size_t i = 1; i < n; ++i) {
            double d = a[i] - b[i];
            if (d < mn) mn = d;
            if (d > mx) mx = d;
        }
    }
    *lo = mn;
    *hi = mx;
}

std::size_t k_clamp_floor(double* y, double floor, std::size_t n) {
    __m256d vf = _mm256_set1_pd(floor);
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(y + i);
        __m256d lt = _mm256_cmp_pd(v, vf, _CMP_LT_OQ);
        int mask = _mm256_movemask_pd(lt);
        if (mask) {
            _mm256_storeu_pd(y + i, _mm256_max_pd(v, vf));
            count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
        }
    }
    for (; i < n; ++i) {
        if (y[i] < floor) {
            y[i] = floor;
            ++count;
        }
    }
    return count;
}

const Ops kAvx2Ops = {
    k_sum, k_dot, k_mul, k_scale, k_axpy, k_exp_fill, k_log_fill,
    k_minmax, k_minmax_diff, k_clamp_floor, k_cmul_factors,
    "avx2",
};

}  // namespace

const Ops* avx2_ops_impl() { return &kAvx2Ops; }

}  // namespace slowenv::kernels

#endif  // x86
