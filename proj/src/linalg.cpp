#include "slowenv/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

extern "C" {
void dsyev_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda, double* w,
            double* work, const int* lwork, int* info);
}

namespace slowenv {

std::vector<double> periodic_schrodinger_matrix(const TorusGrid& g, const double* xi,
                                                double kappa) {
    const std::size_t n = static_cast<std::size_t>(g.n());
    double c = kappa * static_cast<double>(g.n()) * static_cast<double>(g.n());
    std::vector<double> a(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        a[j * n + j] = -2.0 * c + xi[j];
        a[j * n + (j + 1) % n] += c;
        a[j * n + (j + n - 1) % n] += c;
    }
    return a;
}

SymEigen sym_eigen(const std::vector<double>& a, int n) {
    if (n < 1 || a.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw std::invalid_argument("sym_eigen: bad dimensions");

    SymEigen out;
    out.n = n;
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    out.vectors.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < a.size(); ++i) out.vectors[i] = a[i];

    int info = 0;
    int lwork = -1;
    double wkopt = 0.0;
    dsyev_("V", "L", &n, out.vectors.data(), &n, out.eigenvalues.data(), &wkopt, &lwork, &info);
    if (info != 0) throw NumericalBreakdown("sym_eigen: workspace query failed");
    lwork = static_cast<int>(wkopt);
    std::vector<double> work(static_cast<std::size_t>(lwork));
    dsyev_("V", "L", &n, out.vectors.data(), &n, out.eigenvalues.data(), work.data(), &lwork,
           &info);
    if (info != 0)
        throw NumericalBreakdown("sym_eigen: dsyev failed to converge, info=" +
                                 std::to_string(info));
    return out;
}

CyclicTridiag::CyclicTridiag(const std::vector<double>& diag, const std::vector<double>& off) {
    n_ = static_cast<int>(diag.size());
    if (n_ < 2 || off.size() != diag.size())
        throw std::invalid_argument("CyclicTridiag: bad dimensions");
    corner_ = off[static_cast<std::size_t>(n_ - 1)];

    if (n_ == 2) {
        // periodic wrap degenerates to a dense 2x2 system
        diag_ = diag;
        off_ = {off[0] + corner_};
        return;
    }

    gamma_ = -diag[0];
    diag_ = diag;
    diag_[0] -= gamma_;
    diag_[static_cast<std::size_t>(n_ - 1)] -= corner_ * corner_ / gamma_;
    off_.assign(off.begin(), off.end() - 1);

    // Thomas factorization of the core tridiagonal
    cprime_.resize(static_cast<std::size_t>(n_ - 1));
    std::vector<double> invm(static_cast<std::size_t>(n_));
    double m = diag_[0];
    if (m == 0.0) throw NumericalBreakdown("CyclicTridiag: zero pivot");
    invm[0] = 1.0 / m;
    for (int i = 1; i < n_; ++i) {
        cprime_[static_cast<std::size_t>(i - 1)] = off_[static_cast<std::size_t>(i - 1)] * invm[static_cast<std::size_t>(i - 1)];
        m = diag_[static_cast<std::size_t>(i)] -
            off_[static_cast<std::size_t>(i - 1)] * cprime_[static_cast<std::size_t>(i - 1)];
        if (m == 0.0) throw NumericalBreakdown("CyclicTridiag: zero pivot");
        invm[static_cast<std::size_t>(i)] = 1.0 / m;
    }
    diag_.swap(invm);  // store reciprocals of the pivots in diag_

    // corner correction: solve T z = u with u = (gamma, 0, ..., 0, corner)
    std::vector<double> u(static_cast<std::size_t>(n_), 0.0);
    u[0] = gamma_;
    u[static_cast<std::size_t>(n_ - 1)] = corner_;
    z_.resize(static_cast<std::size_t>(n_));
    thomas(u.data(), z_.data());
}

void CyclicTridiag::thomas(const double* rhs, double* x) const {
    // diag_ holds reciprocal pivots
    x[0] = rhs[0] * diag_[0];
    for (int i = 1; i < n_; ++i)
        x[i] = (rhs[i] - off_[static_cast<std::size_t>(i - 1)] * x[i - 1]) *
               diag_[static_cast<std::size_t>(i)];
    for (int i = n_ - 2; i >= 0; --i) x[i] -= cprime_[static_cast<std::size_t>(i)] * x[i + 1];
}

void CyclicTridiag::solve(const double* rhs, double* x) const {
    if (n_ == 2) {
        double a = diag_[0], b = off_[0], d = diag_[1];
        double det = a * d - b * b;
        if (det == 0.0) throw NumericalBreakdown("CyclicTridiag: singular 2x2 system");
        x[0] = (d * rhs[0] - b * rhs[1]) / det;
        x[1] = (a * rhs[1] - b * rhs[0]) / det;
        return;
    }
    thomas(rhs, x);
    double vend = corner_ / gamma_;
    double fact = (x[0] + vend * x[n_ - 1]) / (1.0 + z_[0] + vend * z_[static_cast<std::size_t>(n_ - 1)]);
    for (int i = 0; i < n_; ++i) x[i] -= fact * z_[static_cast<std::size_t>(i)];
}

}  // namespace slowenv
