#pragma once

#include <cstdint>
#include <vector>

#include "slowenv/common.hpp"
#include "slowenv/noise.hpp"
#include "slowenv/rng.hpp"
#include "slowenv/torus_grid.hpp"

// The projective space Pr = { phi >= 0, int phi = 1 } with Hilbert's
// projective metric d_H(phi, psi) = max log(phi/psi) - min log(phi/psi),
// plus the synchronization and Birkhoff-contraction diagnostics.

namespace slowenv {

struct SchemeConfig;  // propagator.hpp

struct ProjectiveDensity {
    Field field;
    AlignedVec log_values;  // cached log of the (clamped) values

    int n() const { return field.n(); }
    const TorusGrid& grid() const { return *field.grid; }
};

struct NormalizeResult {
    ProjectiveDensity z;
    double log_mass = 0.0;
    std::size_t clamp_events = 0;
};

// z = f / int(f); values below kEpsPos are raised there first (each event is
// counted). Throws DegenerateMass when the input carries no usable mass.
NormalizeResult normalize(const Field& f);

ProjectiveDensity uniform_density(const TorusGrid& g);

// exp(cos(2 pi x)) normalized; the canonical non-uniform start profile
ProjectiveDensity cosine_bump_density(const TorusGrid& g);

double hilbert_distance(const ProjectiveDensity& a, const ProjectiveDensity& b);

struct SyncReport {
    std::vector<double> distances;  // d_H per period, index 0 = initial
    double fitted_slope = 0.0;      // per unit time
    double slope_stderr = 0.0;
    bool underflow = false;         // hit the d_H resolution floor before/inside the window
    std::size_t points_used = 0;
};

// Evolves two densities under identical noise, records d_H each period and
// fits log d_H against time (first 10% discarded, underflowed points droppped).
SyncReport synchronization_rate(const ProjectiveDensity& u0_a, const ProjectiveDensity& u0_b,
                                const RenewalPotential& r, std::uint64_t n_periods,
                                const SchemeConfig& cfg);

struct BirkhoffEstimate {
    double mu_hat = 0.0;            // max contraction ratio over sampled pairs (lower bound)
    std::size_t pairs_used = 0;
    double max_pair_d0 = 0.0;       // d_H of the worst pair before the map
    double max_pair_d1 = 0.0;       // ... and after
};

// Samples random pairs in Pr (smoothed log-Gaussian profiles, log-range 2)
// and measures d_H(A phi, A psi) / d_H(phi, psi) for A = one-period
// propagation with the given frozen environment.
BirkhoffEstimate birkhoff_coefficient_estimate(const PotentialSample& xi, double tau,
                                               const SchemeConfig& cfg, int n_pairs,
                                               rng::Key key);

// A random strictly positive density: log-profile = heat-smoothed white field
// rescaled to log-range 2 (the pair generator used by the Birkhoff estimate).
ProjectiveDensity random_density(const TorusGrid& g, rng::Key key, std::uint64_t index);

}  // namespace slowenv
