#pragma once

#include <cstddef>
#include <cstdlib>
#include <new>
#include <stdexcept>
#include <string>
#include <utility>

namespace slowenv {

// Error taxonomy used across the library. Preconditions throw
// std::invalid_argument directly; these cover runtime failures.
struct NumericalBreakdown : std::runtime_error {
    explicit NumericalBreakdown(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateMass : std::runtime_error {
    explicit DegenerateMass(const std::string& what) : std::runtime_error(what) {}
};
struct NotFinite : std::runtime_error {
    explicit NotFinite(const std::string& what) : std::runtime_error(what) {}
};
struct Unsupported : std::runtime_error {
    explicit Unsupported(const std::string& what) : std::runtime_error(what) {}
};
struct PerronViolation : std::runtime_error {
    explicit PerronViolation(const std::string& what) : std::runtime_error(what) {}
};

// Positivity floor applied immediately before any logarithm.
inline constexpr double kEpsPos = 1e-300;

// 64-byte aligned double buffer. FFTW plans and the SIMD kernels both want
// aligned data; std::vector<double> only guarantees 16 bytes.
class AlignedVec {
  public:
    AlignedVec() = default;
    explicit AlignedVec(std::size_t n, double fill = 0.0) { assign(n, fill); }
    AlignedVec(const AlignedVec& o) { assign_copy(o.data_, o.n_); }
    AlignedVec(AlignedVec&& o) noexcept : data_(o.data_), n_(o.n_) { o.data_ = nullptr; o.n_ = 0; }
    AlignedVec& operator=(const AlignedVec& o) {
        if (this != &o) assign_copy(o.data_, o.n_);
        return *this;
    }
    AlignedVec& operator=(AlignedVec&& o) noexcept {
        if (this != &o) {
            release();
            data_ = o.data_; n_ = o.n_;
            o.data_ = nullptr; o.n_ = 0;
        }
        return *this;
    }
    ~AlignedVec() { release(); }

    void assign(std::size_t n, double fill) {
        resize(n);
        for (std::size_t i = 0; i < n_; ++i) data_[i] = fill;
    }
    void resize(std::size_t n) {
        if (n == n_) return;
        release();
        if (n > 0) {
            data_ = static_cast<double*>(::operator new[](n * sizeof(double), std::align_val_t(64)));
        }
        n_ = n;
    }

    double* data() { return data_; }
    const double* data() const { return data_; }
    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }
    double& operator[](std::size_t i) { return data_[i]; }
    const double& operator[](std::size_t i) const { return data_[i]; }
    double* begin() { return data_; }
    double* end() { return data_ + n_; }
    const double* begin() const { return data_; }
    const double* end() const { return data_ + n_; }

  private:
    void assign_copy(const double* src, std::size_t n) {
        resize(n);
        for (std::size_t i = 0; i < n_; ++i) data_[i] = src[i];
    }
    void release() {
        if (data_) ::operator delete[](data_, std::align_val_t(64));
        data_ = nullptr;
        n_ = 0;
    }
    double* data_ = nullptr;
    std::size_t n_ = 0;
};

}  // namespace slowenv
