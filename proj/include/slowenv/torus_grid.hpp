#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "slowenv/common.hpp"

// Uniform periodic grid on the torus R/Z with n nodes x_j = j/n, quadrature
// by the rectangle rule (spectrally exact below Nyquist), the discrete
// Fourier transform in the convention  F f(k) = dx * sum_j f(x_j) e^{-2pi i x_j k},
// and the exact heat semigroup e^{t kappa Laplace} with Fourier symbol
// -(2 pi k)^2. Transforms are backed by FFTW (double precision, ESTIMATE
// plans so the algorithm choice is deterministic).
//
// A TorusGrid is immutable after construction and may be shared read-only by
// any number of threads; the raw transform entry points are safe to call
// concurrently on distinct buffers.

namespace slowenv {

class TorusGrid {
  public:
    explicit TorusGrid(int n);
    ~TorusGrid();
    TorusGrid(TorusGrid&&) noexcept;
    TorusGrid& operator=(TorusGrid&&) noexcept;
    TorusGrid(const TorusGrid&) = delete;
    TorusGrid& operator=(const TorusGrid&) = delete;

    int n() const { return n_; }
    double dx() const { return dx_; }
    double node(int j) const { return nodes_[static_cast<std::size_t>(j)]; }
    const std::vector<double>& nodes() const { return nodes_; }
    // number of independent coefficients of the half (real-input) spectrum
    int half_spectrum() const { return n_ / 2 + 1; }

    // Raw unnormalized transforms; buffers must be 64-byte aligned (AlignedVec
    // or fftw_malloc) and distinct. r2c produces n/2+1 coefficients.
    void r2c(const double* in, std::complex<double>* out) const;
    void c2r(const std::complex<double>* in, double* out) const;
    void dft(const std::complex<double>* in, std::complex<double>* out, bool forward) const;

  private:
    int n_ = 0;
    double dx_ = 0.0;
    std::vector<double> nodes_;
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

TorusGrid make_grid(int n);

struct Field {
    const TorusGrid* grid = nullptr;
    AlignedVec values;

    Field() = default;
    explicit Field(const TorusGrid& g, double fill = 0.0)
        : grid(&g), values(static_cast<std::size_t>(g.n()), fill) {}
    template <class Fn>
    static Field from_function(const TorusGrid& g, Fn&& fn) {
        Field f(g);
        for (int j = 0; j < g.n(); ++j) f.values[static_cast<std::size_t>(j)] = fn(g.node(j));
        return f;
    }
    int n() const { return grid ? grid->n() : 0; }
    double& operator[](std::size_t j) { return values[j]; }
    const double& operator[](std::size_t j) const { return values[j]; }
};

struct SpectralCoeffs {
    const TorusGrid* grid = nullptr;
    // FFT storage order: index j holds frequency k = j for j <= n/2-1,
    // k = j - n otherwise
    std::vector<std::complex<double>> coeffs;

    int min_freq() const { return -(grid->n() / 2); }
    int max_freq() const { return (grid->n() + 1) / 2 - 1; }
    std::complex<double> at_freq(int k) const {
        int n = grid->n();
        return coeffs[static_cast<std::size_t>((k % n + n) % n)];
    }
    std::complex<double>& at_freq(int k) {
        int n = grid->n();
        return coeffs[static_cast<std::size_t>((k % n + n) % n)];
    }
};

// dx * sum_j f(x_j)
double integrate(const Field& f);

// L2 inner product dx * sum_j f_j g_j
double inner(const Field& f, const Field& g);

SpectralCoeffs spectral_forward(const Field& f);
Field spectral_inverse(const SpectralCoeffs& c);

// multiplies mode k by exp(-t kappa (2 pi k)^2); conserves the integral
Field heat_apply(const Field& f, double t, double kappa);

}  // namespace slowenv
