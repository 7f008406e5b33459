// NEON lane for aarch64 builds. Same algorithms as the AVX2 lane with
// float64x2_t vectors; float64 NEON is baseline on A64 so no runtime check is
// needed beyond the architecture itself.

#if defined(__aarch64__)

#include "slowenv/kernels.hpp"

#include <arm_neon.h>

#include <cmath>
#include <cstdint>

namespace slowenv::kernels {
namespace {

double k_sum(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
        acc1 = vaddq_f64(acc1, vld1q_f64(a + i + 2));
    }
    double s = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) s += a[i];
    return s;
}

double k_dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double s = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void k_mul(double* y, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] *= x[i];
}

void k_scale(double* y, double c, std::size_t n) {
    float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(vld1q_f64(y + i), vc));
    for (; i < n; ++i) y[i] *= c;
}

void k_axpy(double* y, double a, const double* x, std::size_t n) {
    float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void k_cmul_factors(double* c, const double* f, std::size_t npairs) {
    std::size_t i = 0;
    for (; i + 2 <= npairs; i += 2) {
        float64x2_t vf = vld1q_f64(f + i);
        vst1q_f64(c + 2 * i, vmulq_f64(vld1q_f64(c + 2 * i), vdupq_laneq_f64(vf, 0)));
        vst1q_f64(c + 2 * i + 2, vmulq_f64(vld1q_f64(c + 2 * i + 2), vdupq_laneq_f64(vf, 1)));
    }
    for (; i < npairs; ++i) {
        c[2 * i] *= f[i];
        c[2 * i + 1] *= f[i];
    }
}

inline float64x2_t pow2_int(float64x2_t k) {
    int64x2_t ki = vcvtnq_s64_f64(k);
    int64x2_t bits = vshlq_n_s64(vaddq_s64(ki, vdupq_n_s64(1023)), 52);
    return vreinterpretq_f64_s64(bits);
}

inline float64x2_t exp_core(float64x2_t x) {
    x = vminq_f64(vmaxq_f64(x, vdupq_n_f64(-746.0)), vdupq_n_f64(710.0));

    const float64x2_t log2e = vdupq_n_f64(1.4426950408889634074);
    const float64x2_t ln2_hi = vdupq_n_f64(6.93147180369123816490e-01);
    const float64x2_t ln2_lo = vdupq_n_f64(1.90821492927058770002e-10);

    float64x2_t nf = vrndnq_f64(vmulq_f64(x, log2e));
    float64x2_t r = vfmsq_f64(x, nf, ln2_hi);
    r = vfmsq_f64(r, nf, ln2_lo);

    float64x2_t p = vdupq_n_f64(1.0 / 6227020800.0);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 479001600.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 39916800.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 3628800.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 362880.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 40320.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 5040.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 720.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 120.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 24.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 6.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(0.5), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0), p, r);

    float64x2_t n1 = vrndnq_f64(vmulq_f64(nf, vdupq_n_f64(0.5)));
    float64x2_t n2 = vsubq_f64(nf, n1);
    return vmulq_f64(vmulq_f64(p, pow2_int(n1)), pow2_int(n2));
}

void k_exp_fill(double* dst, const double* src, double c, std::size_t n) {
    float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, exp_core(vmulq_f64(vc, vld1q_f64(src + i))));
    for (; i < n; ++i) dst[i] = std::exp(c * src[i]);
}

inline float64x2_t log_core(float64x2_t x) {
    const float64x2_t one = vdupq_n_f64(1.0);
    int64x2_t bits = vreinterpretq_s64_f64(x);
    int64x2_t expo = vsubq_s64(vshrq_n_s64(bits, 52), vdupq_n_s64(1023));
    float64x2_t e = vcvtq_f64_s64(expo);

    int64x2_t mant = vorrq_s64(vandq_s64(bits, vdupq_n_s64(0x000FFFFFFFFFFFFFLL)),
                               vreinterpretq_s64_f64(one));
    float64x2_t m = vreinterpretq_f64_s64(mant);

    uint64x2_t big = vcgtq_f64(m, vdupq_n_f64(1.4142135623730951));
    m = vbslq_f64(big, vmulq_f64(m, vdupq_n_f64(0.5)), m);
    e = vbslq_f64(big, vaddq_f64(e, one), e);

    float64x2_t s = vdivq_f64(vsubq_f64(m, one), vaddq_f64(m, one));
    float64x2_t z = vmulq_f64(s, s);

    float64x2_t p = vdupq_n_f64(2.0 / 21.0);
    p = vfmaq_f64(vdupq_n_f64(2.0 / 19.0), p, z);
    p = vfmaq_f64(vdupq_n_f64(2.0 / 17.0), p, z);
    p = vfmaq_f64(vdupq_n_f64(2.0 / 15.0), p, z);
    p = vfmaq_f64(vdupq_n_f64(2.0 / 13.0), p, z);
    p = vfmaq_f64(vdupq_n_f64(2.0 / 11.0), p, z);
    p = vfmaq_f64(vdupq_n_f64(2.0 / 9.0), p, z);
    p = vfmaq_f64(vdupq_n_f64(2.0 / 7.0), p, z);
    p = vfmaq_f64(vdupq_n_f64(2.0 / 5.0), p, z);
    p = vfmaq_f64(vdupq_n_f64(2.0 / 3.0), p, z);
    p = vfmaq_f64(vdupq_n_f64(2.0), p, z);
    float64x2_t logm = vmulq_f64(p, s);

    const float64x2_t ln2_hi = vdupq_n_f64(6.93147180369123816490e-01);
    const float64x2_t ln2_lo = vdupq_n_f64(1.90821492927058770002e-10);
    float64x2_t res = vfmaq_f64(logm, e, ln2_lo);
    return vfmaq_f64(res, e, ln2_hi);
}

void k_log_fill(double* dst, const double* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, log_core(vld1q_f64(src + i)));
    for (; i < n; ++i) dst[i] = std::log(src[i]);
}

void k_minmax(const double* a, std::size_t n, double* lo, double* hi) {
    double mn, mx;
    if (n >= 2) {
        float64x2_t vmn = vld1q_f64(a);
        float64x2_t vmx = vmn;
        std::size_t i = 2;
        for (; i + 2 <= n; i += 2) {
            float64x2_t v = vld1q_f64(a + i);
            vmn = vminq_f64(vmn, v);
            vmx = vmaxq_f64(vmx, v);
        }
        mn = vminvq_f64(vmn);
        mx = vmaxvq_f64(vmx);
        for (; i < n; ++i) {
            if (a[i] < mn) mn = a[i];
            if (a[i] > mx) mx = a[i];
        }
    } else {
        mn = mx = a[0];
    }
    *lo = mn;
    *hi = mx;
}

void k_minmax_diff(const double* a, const double* b, std::size_t n, double* lo, double* hi) {
    double mn, mx;
    if (n >= 2) {
        float64x2_t vmn = vsubq_f64(vld1q_f64(a), vld1q_f64(b));
        float64x2_t vmx = vmn;
        std::size_t i = 2;
        for (; i + 2 <= n; i += 2) {
            float64x2_t v = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
            vmn = vminq_f64(vmn, v);
            vmx = vmaxq_f64(vmx, v);
        }
        mn = vminvq_f64(vmn);
        mx = vmaxvq_f64(vmx);
        for (; i < n; ++i) {
            double d = a[i] - b[i];
            if (d < mn) mn = d;
            if (d > mx) mx = d;
        }
    } else {
        mn = mx = a[0] - b[0];
    }
    *lo = mn;
    *hi = mx;
}

std::size_t k_clamp_floor(double* y, double floor, std::size_t n) {
    float64x2_t vf = vdupq_n_f64(floor);
    uint64x2_t ones = vdupq_n_u64(1);
    uint64x2_t cnt = vdupq_n_u64(0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(y + i);
        uint64x2_t lt = vcltq_f64(v, vf);
        vst1q_f64(y + i, vmaxq_f64(v, vf));
        cnt = vaddq_u64(cnt, vandq_u64(lt, ones));
    }
    std::size_t count = vgetq_lane_u64(cnt, 0) + vgetq_lane_u64(cnt, 1);
    for (; i < n; ++i) {
        if (y[i] < floor) {
            y[i] = floor;
            ++count;
        }
    }
    return count;
}

const Ops kNeonOps = {
    k_sum, k_dot, k_mul, k_scale, k_axpy, k_exp_fill, k_log_fill,
    k_minmax, k_minmax_diff, k_clamp_floor, k_cmul_factors,
    "neon",
};

}  // namespace

const Ops* neon_ops_impl() { return &kNeonOps; }

}  // namespace slowenv::kernels

#endif  // aarch64
