#pragma once

#include <cstdint>

#include "slowenv/noise.hpp"
#include "slowenv/projective.hpp"
#include "slowenv/rng.hpp"
#include "slowenv/torus_grid.hpp"

// Top eigenpair of H = kappa Laplace + xi (periodic second-difference
// matrix), the Doob H-transform quantities zeta, psi, mu = d_H(psi, 1), and
// the large-tau sandwich  E[zeta] >= lambda(tau) >= E[zeta - mu/tau].

namespace slowenv {

struct EigenPair {
    double zeta = 0.0;         // top eigenvalue (Rayleigh-polished)
    ProjectiveDensity psi;     // Perron eigenfunction, positive, unit integral
    double residual = 0.0;     // ||H psi - zeta psi||_inf / ||psi||_inf
};

EigenPair top_eigenpair(const PotentialSample& xi, double kappa);

// mu = log max psi - log min psi = d_H(psi, 1)
double doob_mu(const EigenPair& pair);

struct DoobCheck {
    double dh_defect = 0.0;    // d_H(e^{tau H} psi, psi)
    double mass_defect = 0.0;  // |log-mass - tau zeta|
};

// e^{tau H} psi = e^{tau zeta} psi, checked through the EigenExact propagator
DoobCheck doob_consistency_check(const PotentialSample& xi, double tau, double kappa);

struct BoundsReport {
    double zeta_mean = 0.0;
    double zeta_stderr = 0.0;
    double mu_mean = 0.0;
    double mu_stderr = 0.0;
    double lower = 0.0;        // zeta_mean - mu_mean / tau
    double lambda_hat = 0.0;   // the estimate being sandwiched
    double lambda_stderr = 0.0;
    bool upper_ok = false;
    bool lower_ok = false;
    int n_samples = 0;
};

BoundsReport sandwich_bounds(const NoiseSpec& spec, const TorusGrid& g, double kappa, double tau,
                             int n_samples, double lambda_hat, double lambda_stderr, rng::Key key,
                             int threads = 1);

}  // namespace slowenv
