#include "slowenv/torus_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "slowenv/kernels.hpp"

namespace slowenv {

namespace {
// FFTW plan creation is not thread-safe; execution on distinct buffers is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct TorusGrid::Plans {
    fftw_plan fwd = nullptr;   // complex forward
    fftw_plan bwd = nullptr;   // complex backward
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    AlignedVec c_in, c_out;    // prototype buffers (alignment templates)
    AlignedVec r_buf, h_buf;

    ~Plans() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (r2c) fftw_destroy_plan(r2c);
        if (c2r) fftw_destroy_plan(c2r);
    }
};

TorusGrid::TorusGrid(int n) {
    if (n < 2) throw std::invalid_argument("TorusGrid: need n >= 2");
    n_ = n;
    dx_ = 1.0 / static_cast<double>(n);
    nodes_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) nodes_[static_cast<std::size_t>(j)] = static_cast<double>(j) * dx_;

    plans_ = std::make_unique<Plans>();
    plans_->c_in.resize(2 * static_cast<std::size_t>(n));
    plans_->c_out.resize(2 * static_cast<std::size_t>(n));
    plans_->r_buf.resize(static_cast<std::size_t>(n));
    plans_->h_buf.resize(2 * static_cast<std::size_t>(n / 2 + 1));

    auto* ci = reinterpret_cast<fftw_complex*>(plans_->c_in.data());
    auto* co = reinterpret_cast<fftw_complex*>(plans_->c_out.data());
    auto* hb = reinterpret_cast<fftw_complex*>(plans_->h_buf.data());

    std::lock_guard<std::mutex> lock(plan_mutex());
    plans_->fwd = fftw_plan_dft_1d(n, ci, co, FFTW_FORWARD, FFTW_ESTIMATE);
    plans_->bwd = fftw_plan_dft_1d(n, ci, co, FFTW_BACKWARD, FFTW_ESTIMATE);
    plans_->r2c = fftw_plan_dft_r2c_1d(n, plans_->r_buf.data(), hb, FFTW_ESTIMATE);
    plans_->c2r = fftw_plan_dft_c2r_1d(n, hb, plans_->r_buf.data(), FFTW_ESTIMATE);
    if (!plans_->fwd || !plans_->bwd || !plans_->r2c || !plans_->c2r)
        throw std::runtime_error("TorusGrid: FFTW plan creation failed");
}

TorusGrid::~TorusGrid() = default;
TorusGrid::TorusGrid(TorusGrid&&) noexcept = default;
TorusGrid& TorusGrid::operator=(TorusGrid&&) noexcept = default;

void TorusGrid::r2c(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
}

void TorusGrid::c2r(const std::complex<double>* in, double* out) const {
    // FFTW c2r destroys its input; callers treat the spectral buffer as scratch
    fftw_execute_dft_c2r(plans_->c2r,
                         reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                         out);
}

void TorusGrid::dft(const std::complex<double>* in, std::complex<double>* out,
                    bool forward) const {
    fftw_execute_dft(forward ? plans_->fwd : plans_->bwd,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

TorusGrid make_grid(int n) { return TorusGrid(n); }

double integrate(const Field& f) {
    return f.grid->dx() * kernels::active().sum(f.values.data(), f.values.size());
}

double inner(const Field& f, const Field& g) {
    return f.grid->dx() * kernels::active().dot(f.values.data(), g.values.data(), f.values.size());
}

SpectralCoeffs spectral_forward(const Field& f) {
    const TorusGrid& g = *f.grid;
    std::size_t n = static_cast<std::size_t>(g.n());
    AlignedVec in(2 * n), out(2 * n);
    auto* inc = reinterpret_cast<std::complex<double>*>(in.data());
    for (std::size_t j = 0; j < n; ++j) inc[j] = f.values[j];
    g.dft(inc, reinterpret_cast<std::complex<double>*>(out.data()), true);

    SpectralCoeffs c;
    c.grid = &g;
    c.coeffs.resize(n);
    const auto* outc = reinterpret_cast<const std::complex<double>*>(out.data());
    double scale = g.dx();
    for (std::size_t j = 0; j < n; ++j) c.coeffs[j] = outc[j] * scale;
    return c;
}

Field spectral_inverse(const SpectralCoeffs& c) {
    const TorusGrid& g = *c.grid;
    std::size_t n = static_cast<std::size_t>(g.n());
    if (c.coeffs.size() != n) throw std::invalid_argument("spectral_inverse: size mismatch");
    AlignedVec in(2 * n), out(2 * n);
    auto* inc = reinterpret_cast<std::complex<double>*>(in.data());
    for (std::size_t j = 0; j < n; ++j) inc[j] = c.coeffs[j];
    g.dft(inc, reinterpret_cast<std::complex<double>*>(out.data()), false);

    Field f(g);
    const auto* outc = reinterpret_cast<const std::complex<double>*>(out.data());
    for (std::size_t j = 0; j < n; ++j) f.values[j] = outc[j].real();
    return f;
}

Field heat_apply(const Field& f, double t, double kappa) {
    if (t < 0.0) throw std::invalid_argument("heat_apply: t must be nonnegative");
    if (kappa <= 0.0) throw std::invalid_argument("heat_apply: kappa must be positive");
    const TorusGrid& g = *f.grid;
    if (t == 0.0) return f;

    std::size_t n = static_cast<std::size_t>(g.n());
    std::size_t m = static_cast<std::size_t>(g.half_spectrum());
    AlignedVec spec(2 * m);
    auto* sc = reinterpret_cast<std::complex<double>*>(spec.data());
    g.r2c(f.values.data(), sc);

    const double two_pi = 6.283185307179586477;
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < m; ++k) {
        double w = two_pi * static_cast<double>(k);
        // inv_n folds in the unnormalized FFTW roundtrip; k = 0 keeps weight
        // exactly 1/n so the integral is conserved
        sc[k] *= std::exp(-t * kappa * w * w) * inv_n;
    }

    Field out(g);
    g.c2r(sc, out.values.data());
    return out;
}

}  // namespace slowenv
