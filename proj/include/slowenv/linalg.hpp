#pragma once

#include <vector>

#include "slowenv/common.hpp"
#include "slowenv/torus_grid.hpp"

namespace slowenv {

// kappa L + diag(xi) with L the periodic second-difference matrix, full
// column-major storage (the n = 2 double coupling is handled)
std::vector<double> periodic_schrodinger_matrix(const TorusGrid& g, const double* xi,
                                                double kappa);

// Dense symmetric eigendecomposition (LAPACK dsyev). Eigenvalues ascending,
// eigenvectors stored column-major, column k <-> eigenvalues[k].
struct SymEigen {
    int n = 0;
    std::vector<double> eigenvalues;
    AlignedVec vectors;

    const double* column(int k) const { return vectors.data() + static_cast<std::size_t>(k) * n; }
};

// a: column-major n x n symmetric matrix (full storage). Throws
// NumericalBreakdown if the solver fails to converge.
SymEigen sym_eigen(const std::vector<double>& a, int n);

// Factorization of a symmetric cyclic tridiagonal matrix: diagonal d[i] and
// off-diagonal o[i] coupling node i with (i+1) mod n (o[n-1] is the periodic
// corner). Thomas elimination plus a Sherman-Morrison corner correction;
// intended for diagonally dominant systems (Crank-Nicolson steps).
class CyclicTridiag {
  public:
    CyclicTridiag(const std::vector<double>& diag, const std::vector<double>& off);
    void solve(const double* rhs, double* x) const;
    int n() const { return n_; }

  private:
    void thomas(const double* rhs, double* x) const;
    int n_ = 0;
    std::vector<double> diag_;   // modified diagonal
    std::vector<double> off_;    // off-diagonals of the core tridiagonal
    std::vector<double> cprime_; // precomputed forward-sweep coefficients
    std::vector<double> z_;      // solve of the corner correction vector
    double gamma_ = 0.0;
    double corner_ = 0.0;
};

}  // namespace slowenv
