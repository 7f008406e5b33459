#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops of the simulator. Every kernel exists as a scalar
// reference implementation plus SIMD variants (AVX2 on x86-64, NEON on
// aarch64) selected once at runtime. The scalar lane is the semantic
// definition; SIMD lanes must match it within a few ulp (reductions may
// differ by association order). The environment variable SLOWENV_KERNELS
// ({auto, scalar, avx2, neon}) overrides the automatic pick.
//
// Domain notes: exp_fill/log_fill require finite input; log_fill additionally
// requires normal positive input (the simulator clamps at kEpsPos first).

namespace slowenv::kernels {

struct Ops {
    // sum_i a[i]
    double (*sum)(const double* a, std::size_t n);
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] *= x[i]
    void (*mul)(double* y, const double* x, std::size_t n);
    // y[i] *= c
    void (*scale)(double* y, double c, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
    // dst[i] = exp(c * src[i])
    void (*exp_fill)(double* dst, const double* src, double c, std::size_t n);
    // dst[i] = log(src[i])
    void (*log_fill)(double* dst, const double* src, std::size_t n);
    // *lo = min_i a[i], *hi = max_i a[i]; n >= 1
    void (*minmax)(const double* a, std::size_t n, double* lo, double* hi);
    // *lo = min_i (a[i]-b[i]), *hi = max_i (a[i]-b[i]); n >= 1
    void (*minmax_diff)(const double* a, const double* b, std::size_t n, double* lo, double* hi);
    // y[i] = max(y[i], floor); returns how many entries were raised
    std::size_t (*clamp_floor)(double* y, double floor, std::size_t n);
    // interleaved complex c[2i],c[2i+1] scaled by real f[i], i < npairs
    void (*cmul_factors)(double* c, const double* f, std::size_t npairs);
    const char* name;
};

// Backend selected at startup (cpuid + SLOWENV_KERNELS override).
const Ops& active();

// Reference lane, always available.
const Ops& scalar_ops();

// Lookup by name ("scalar", "avx2", "neon"); nullptr when the lane is not
// compiled in or not runnable on this CPU.
const Ops* ops_by_name(std::string_view name);

}  // namespace slowenv::kernels
