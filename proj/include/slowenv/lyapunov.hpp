#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slowenv/noise.hpp"
#include "slowenv/propagator.hpp"
#include "slowenv/rng.hpp"
#include "slowenv/torus_grid.hpp"

// Lyapunov-exponent estimators.
//
// estimate_time_average accumulates per-period log-mass increments of one (or
// several pooled) long chains: lambda_hat = sum(increments) / (tau * periods),
// error bars by batch means over contiguous batches (increments are
// correlated through the projective state, so i.i.d. error bars would lie).
//
// estimate_furstenberg evaluates the Furstenberg integral directly: for each
// outer replicate an independent burn-in chain produces an approximate
// invariant profile z_inf, which is then hit by one never-seen evaluation
// environment; the replicate values are i.i.d.

namespace slowenv {

struct RunConfig {
    NoiseSpec noise;
    double kappa = 1.0;
    double tau = 1.0;
    int grid_n = 256;
    std::uint64_t n_periods = 1000;
    int replicas = 1;
    bool burn_in_auto = true;
    std::uint64_t burn_in_fixed = 0;
    std::uint64_t burn_in_cap = 20000;
    Scheme scheme = Scheme::StrangSplit;
    double dt_max = 1e-3;
    std::uint64_t seed = 0;
    int batch_count = 20;
    int threads = 1;

    SchemeConfig scheme_config() const { return SchemeConfig{scheme, dt_max, kappa}; }
    void validate() const;  // throws std::invalid_argument
};

struct ReplicaStats {
    double lambda = 0.0;
    double stderr_ = 0.0;
    double total_log_mass = 0.0;
    std::uint64_t periods_used = 0;
};

struct LyapunovEstimate {
    double lambda_hat = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n_periods_used = 0;  // accumulation periods per replica
    std::uint64_t burn_in_used = 0;
    bool burn_in_capped = false;
    double tau = 0.0;
    std::uint64_t clamp_events = 0;
    double total_log_mass = 0.0;  // pooled over replicas (telescoping checks)
    std::vector<ReplicaStats> replicas;
};

// Coupled-pair burn-in criterion: evolve {uniform, exp(cos)} under the same
// noise until d_H < 1e-8, then add a 25% margin. Capped (with flag via the
// second return) at cap periods.
struct BurnIn {
    std::uint64_t periods = 0;
    bool capped = false;
};
BurnIn determine_burn_in(const NoiseSpec& spec, const TorusGrid& g, double tau,
                         const SchemeConfig& scheme, rng::Key key, std::uint64_t cap);

LyapunovEstimate estimate_time_average(const RunConfig& cfg, const TorusGrid& g);

// Optionally override the start profile (initial-condition independence
// checks); null means the uniform density.
LyapunovEstimate estimate_time_average(const RunConfig& cfg, const TorusGrid& g,
                                       const ProjectiveDensity* u0);

LyapunovEstimate estimate_furstenberg(const RunConfig& cfg, const TorusGrid& g, int n_outer);

struct SweepRow {
    double tau = 0.0;
    LyapunovEstimate estimate;
    bool failed = false;
    std::string error;
};

// One estimate per tau; failures are isolated per row and the sweep continues.
std::vector<SweepRow> sweep_tau(const RunConfig& base, const TorusGrid& g,
                                const std::vector<double>& taus);

}  // namespace slowenv
