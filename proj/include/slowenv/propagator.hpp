#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "slowenv/common.hpp"
#include "slowenv/linalg.hpp"
#include "slowenv/noise.hpp"
#include "slowenv/projective.hpp"
#include "slowenv/rng.hpp"
#include "slowenv/torus_grid.hpp"

// Action of e^{tau H}, H = kappa Laplace + xi, on densities over one renewal
// period. Three interchangeable schemes:
//   EigenExact    dense eigendecomposition of kappa L + diag(xi) applied
//                 exactly (the reference/oracle; L is the periodic
//                 second-difference matrix),
//   StrangSplit   symmetric splitting with exact spectral heat sub-steps and
//                 pointwise exponential reaction sub-steps (the default),
//   CrankNicolson theta = 1/2 stepping of the full operator (independent
//                 cross-check).
// All mass bookkeeping stays in log space; fields are renormalized once per
// period and mid-period when the unnormalized maximum exceeds 1e100.

namespace slowenv {

enum class Scheme { EigenExact, StrangSplit, CrankNicolson };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws invalid_argument

struct SchemeConfig {
    Scheme scheme = Scheme::StrangSplit;
    double dt_max = 1e-3;
    double kappa = 1.0;

    void validate() const;
};

struct PeriodResult {
    ProjectiveDensity z_next;
    double log_mass = 0.0;
    std::size_t clamp_events = 0;
};

// Spectral heat multipliers for the Strang sub-steps, shared across periods
// (they depend on the substep count, not on the sample).
struct StrangTables {
    int m = 0;
    double dt = 0.0;
    AlignedVec half;  // exp(-(dt/2) kappa (2 pi k)^2) / n on the half spectrum
    AlignedVec full;
};

class HeatCache {
  public:
    HeatCache(const TorusGrid& g, double kappa, double tau);
    const StrangTables& get(int m);

  private:
    const TorusGrid* grid_;
    double kappa_;
    double tau_;
    std::map<int, StrangTables> by_m_;
};

// splitting substep count: ceil(tau / min(dt_max, 1/(10 ||xi||_inf)))
int strang_substeps(double tau, double dt_max, double xi_inf);

// One-period propagator for a frozen environment. Builds the scheme tables
// once (eigendecomposition / heat multipliers / Crank-Nicolson factorization)
// and can be applied to many densities. Owns scratch buffers: use one
// instance per worker thread.
class PeriodOperator {
  public:
    PeriodOperator(const PotentialSample& xi, double tau, const SchemeConfig& cfg,
                   HeatCache* shared_heat = nullptr);
    ~PeriodOperator();
    PeriodOperator(PeriodOperator&&) noexcept;

    // rebuild the sample-dependent tables in place (same grid/tau/scheme);
    // storage is reused so driving many periods does not allocate
    void rebind(const PotentialSample& xi);

    PeriodResult apply(const ProjectiveDensity& z);

    // In-place application to unnormalized positive fields. All fields go
    // through the identical operation sequence with renormalization keyed to
    // fields[0]; the returned value is the accumulated log of renormalizations
    // (add log of the final mass for the full log-mass).
    double apply_raw(std::vector<AlignedVec*> fields);

    double tau() const { return tau_; }
    const SchemeConfig& config() const { return cfg_; }
    int substeps() const { return m_; }
    double top_matrix_eigenvalue() const;  // EigenExact only

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SchemeConfig cfg_;
    double tau_ = 0.0;
    int m_ = 1;
};

PeriodResult propagate_period(const ProjectiveDensity& z, const PotentialSample& xi, double tau,
                              const SchemeConfig& cfg);

// d_H(A phi, A psi) for the one-period map A, evaluated through the jointly
// propagated difference field so nearly-coinciding images are still resolved
// far below the naive floating-point floor.
double propagate_pair_distance(const ProjectiveDensity& phi, const ProjectiveDensity& psi,
                               const PotentialSample& xi, double tau, const SchemeConfig& cfg);

struct EvolveResult {
    double total_log_mass = 0.0;
    ProjectiveDensity z_final;
    std::vector<double> increments;  // per-period log-mass (telescoping terms)
    std::size_t clamp_events = 0;
};

// Propagates u0 through n_periods renewal periods starting at period index
// start_index. increments are recorded only when keep_increments is set (the
// sum is always exact either way).
EvolveResult evolve(const ProjectiveDensity& u0, const RenewalPotential& r,
                    std::uint64_t n_periods, const SchemeConfig& cfg,
                    std::uint64_t start_index = 0, bool keep_increments = true);

struct FeynmanKacResult {
    double estimate = 0.0;
    double stderr_ = 0.0;
};

// Monte Carlo estimate of int e^{tau H} z dx through the Feynman-Kac
// representation: Brownian paths with increments of variance 2 kappa dt
// (generator kappa Laplace), potential read at the nearest grid node,
// left-endpoint time integral. Bounded noise kinds only.
FeynmanKacResult feynman_kac_mass(const PotentialSample& xi, double tau,
                                  const ProjectiveDensity& z, std::uint64_t n_paths, double dt_fk,
                                  double kappa, rng::Key key);

}  // namespace slowenv
