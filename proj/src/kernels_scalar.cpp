#include "slowenv/kernels.hpp"

#include <cmath>

// Reference lane. Plain loops, no tricks: this is the semantic definition the
// SIMD lanes are tested against.

namespace slowenv::kernels {
namespace {

double k_sum(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

double k_dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void k_mul(double* y, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] *= x[i];
}

void k_scale(double* y, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] *= c;
}

void k_axpy(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void k_exp_fill(double* dst, const double* src, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::exp(c * src[i]);
}

void k_log_fill(double* dst, const double* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::log(src[i]);
}

void k_minmax(const double* a, std::size_t n, double* lo, double* hi) {
    double mn = a[0], mx = a[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (a[i] < mn) mn = a[i];
        if (a[i] > mx) mx = a[i];
    }
    *lo = mn;
    *hi = mx;
}

void k_minmax_diff(const double* a, const double* b, std::size_t n, double* lo, double* hi) {
    double d0 = a[0] - b[0];
    double mn = d0, mx = d0;
    for (std::size_t i = 1; i < n; ++i) {
        double d = a[i] - b[i];
        if (d < mn) mn = d;
        if (d > mx) mx = d;
    }
    *lo = mn;
    *hi = mx;
}

std::size_t k_clamp_floor(double* y, double floor, std::size_t n) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] < floor) {
            y[i] = floor;
            ++count;
        }
    }
    return count;
}

void k_cmul_factors(double* c, const double* f, std::size_t npairs) {
    for (std::size_t i = 0; i < npairs; ++i) {
        c[2 * i] *= f[i];
        c[2 * i + 1] *= f[i];
    }
}

const Ops kScalarOps = {
    k_sum, k_dot, k_mul, k_scale, k_axpy, k_exp_fill, k_log_fill,
    k_minmax, k_minmax_diff, k_clamp_floor, k_cmul_factors,
    "scalar",
};

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

}  // namespace slowenv::kernels
