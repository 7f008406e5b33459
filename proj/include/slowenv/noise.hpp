#pragma once

#include <cstdint>
#include <string>

#include "slowenv/rng.hpp"
#include "slowenv/torus_grid.hpp"

// Noise classes for the frozen environments: block-constant potentials,
// random Fourier series with Hoelder-type coefficient decay, spatial white
// noise (i.i.d. cell values of variance 1/dx), and space-constant potentials.
// All laws are centered; sigma parameterizes the standard deviation of the
// scalar law. sigma == 0 is the zero-noise control used by the validation
// runs.

namespace slowenv {

enum class NoiseKind { PiecewiseConstant, HolderFourier, WhiteNoise, ConstantInSpace };
enum class ScalarLaw { Rademacher, UniformSym, CenteredGaussian };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::ConstantInSpace;
    // PiecewiseConstant / ConstantInSpace
    int m = 1;
    ScalarLaw law = ScalarLaw::Rademacher;
    double sigma = 1.0;
    // HolderFourier: coefficients a_k = k^{-(alpha+1/2)}, k = 1..K
    double alpha = 0.5;
    int fourier_cutoff = 1;
    bool gaussian_multipliers = true;

    static NoiseSpec piecewise(int m, ScalarLaw law, double sigma);
    static NoiseSpec holder_fourier(double alpha, int K, bool gaussian = true);
    static NoiseSpec white();
    static NoiseSpec constant(ScalarLaw law, double sigma);
    static NoiseSpec zero();

    void validate() const;  // throws std::invalid_argument
    bool bounded() const { return kind != NoiseKind::WhiteNoise; }
    std::string kind_name() const;
    std::string params_string() const;  // compact, comma-free (CSV safe)
};

struct PotentialSample {
    Field field;
    NoiseKind kind = NoiseKind::ConstantInSpace;

    const TorusGrid& grid() const { return *field.grid; }
};

// One frozen environment; pure function of (spec, grid, key, index).
PotentialSample sample_potential(const NoiseSpec& spec, const TorusGrid& grid, rng::Key key,
                                 std::uint64_t index);

// Same draw written into existing storage (no allocation when sized right).
void sample_potential_into(PotentialSample& out, const NoiseSpec& spec, const TorusGrid& grid,
                           rng::Key key, std::uint64_t index);

// subtracts the spatial mean
PotentialSample center_spatially(const PotentialSample& p);

// The renewal (slow) potential xi^tau: sample i is frozen on [i tau, (i+1) tau).
struct RenewalPotential {
    NoiseSpec spec;
    const TorusGrid* grid = nullptr;
    double tau = 1.0;
    rng::Key key;

    RenewalPotential(const NoiseSpec& s, const TorusGrid& g, double tau_, rng::Key k);

    PotentialSample sample(std::uint64_t i) const { return sample_potential(spec, *grid, key, i); }
    PotentialSample at_time(double t) const;  // index floor(t/tau); t < 0 throws
    std::uint64_t index_at(double t) const;
};

// Small-tau variance functional r(0) = (1/4) int int E|xi(x)-xi(y)|^2 dx dy.
// Closed forms: piecewise sigma^2 (1-1/m)/2, Fourier (1/2) sum a_k^2,
// constant 0. White noise diverges -> NotFinite.
double variance_functional(const NoiseSpec& spec);

}  // namespace slowenv
