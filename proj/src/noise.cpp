#include "slowenv/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "slowenv/common.hpp"
#include "slowenv/kernels.hpp"

namespace slowenv {

namespace {
const double kTwoPi = 6.283185307179586477;
const double kSqrt3 = 1.7320508075688772935;

double draw_scalar(ScalarLaw law, double sigma, const rng::Key& key, std::uint64_t hi,
                   std::uint64_t lo) {
    switch (law) {
        case ScalarLaw::Rademacher:
            return sigma * key.sign(hi, lo);
        case ScalarLaw::UniformSym:
            // half-width sqrt(3) sigma so the variance is sigma^2
            return sigma * kSqrt3 * (2.0 * key.uniform(hi, lo) - 1.0);
        case ScalarLaw::CenteredGaussian:
            return sigma * key.normal(hi, lo);
    }
    return 0.0;
}
}  // namespace

NoiseSpec NoiseSpec::piecewise(int m, ScalarLaw law, double sigma) {
    NoiseSpec s;
    s.kind = NoiseKind::PiecewiseConstant;
    s.m = m;
    s.law = law;
    s.sigma = sigma;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::holder_fourier(double alpha, int K, bool gaussian) {
    NoiseSpec s;
    s.kind = NoiseKind::HolderFourier;
    s.alpha = alpha;
    s.fourier_cutoff = K;
    s.gaussian_multipliers = gaussian;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::white() {
    NoiseSpec s;
    s.kind = NoiseKind::WhiteNoise;
    return s;
}

NoiseSpec NoiseSpec::constant(ScalarLaw law, double sigma) {
    NoiseSpec s;
    s.kind = NoiseKind::ConstantInSpace;
    s.m = 1;
    s.law = law;
    s.sigma = sigma;
    s.validate();
    return s;
}

NoiseSpec NoiseSpec::zero() { return constant(ScalarLaw::Rademacher, 0.0); }

void NoiseSpec::validate() const {
    if (sigma < 0.0) throw std::invalid_argument("NoiseSpec: sigma must be >= 0");
    switch (kind) {
        case NoiseKind::PiecewiseConstant:
            if (m < 1) throw std::invalid_argument("NoiseSpec: interval count m must be >= 1");
            break;
        case NoiseKind::HolderFourier:
            if (!(alpha > 0.0 && alpha < 1.0))
                throw std::invalid_argument("NoiseSpec: alpha must lie in (0,1)");
            if (fourier_cutoff < 1) throw std::invalid_argument("NoiseSpec: need K >= 1");
            break;
        case NoiseKind::WhiteNoise:
        case NoiseKind::ConstantInSpace:
            break;
    }
}

std::string NoiseSpec::kind_name() const {
    switch (kind) {
        case NoiseKind::PiecewiseConstant: return "piecewise";
        case NoiseKind::HolderFourier: return "holder_fourier";
        case NoiseKind::WhiteNoise: return "white";
        case NoiseKind::ConstantInSpace: return "constant";
    }
    return "?";
}

namespace {
std::string law_name(ScalarLaw law) {
    switch (law) {
        case ScalarLaw::Rademacher: return "rademacher";
        case ScalarLaw::UniformSym: return "uniform";
        case ScalarLaw::CenteredGaussian: return "gaussian";
    }
    return "?";
}

std::string trim_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}
}  // namespace

std::string NoiseSpec::params_string() const {
    switch (kind) {
        case NoiseKind::PiecewiseConstant:
            return "m=" + std::to_string(m) + ";law=" + law_name(law) + ";sigma=" + trim_num(sigma);
        case NoiseKind::HolderFourier:
            return "alpha=" + trim_num(alpha) + ";K=" + std::to_string(fourier_cutoff) +
                   ";mult=" + std::string(gaussian_multipliers ? "gaussian" : "rademacher");
        case NoiseKind::WhiteNoise:
            return "-";
        case NoiseKind::ConstantInSpace:
            return "law=" + law_name(law) + ";sigma=" + trim_num(sigma);
    }
    return "?";
}

PotentialSample sample_potential(const NoiseSpec& spec, const TorusGrid& grid, rng::Key key,
                                 std::uint64_t index) {
    PotentialSample out;
    sample_potential_into(out, spec, grid, key, index);
    return out;
}

void sample_potential_into(PotentialSample& out, const NoiseSpec& spec, const TorusGrid& grid,
                           rng::Key key, std::uint64_t index) {
    spec.validate();
    const int n = grid.n();
    out.kind = spec.kind;
    out.field.grid = &grid;
    out.field.values.resize(static_cast<std::size_t>(n));
    double* v = out.field.values.data();

    switch (spec.kind) {
        case NoiseKind::PiecewiseConstant: {
            if (n % spec.m != 0)
                throw std::invalid_argument("sample_potential: grid size not divisible by m");
            int block = n / spec.m;
            for (int b = 0; b < spec.m; ++b) {
                double x = draw_scalar(spec.law, spec.sigma, key, index,
                                       static_cast<std::uint64_t>(b));
                for (int j = b * block; j < (b + 1) * block; ++j) v[j] = x;
            }
            break;
        }
        case NoiseKind::HolderFourier: {
            int K = spec.fourier_cutoff;
            if (2 * K >= n)
                throw std::invalid_argument(
                    "sample_potential: Fourier cutoff must satisfy 2K < n for an exact grid "
                    "representation");
            for (int j = 0; j < n; ++j) v[j] = 0.0;
            for (int k = 1; k <= K; ++k) {
                double ak = std::pow(static_cast<double>(k), -(spec.alpha + 0.5));
                double gc, gs;
                if (spec.gaussian_multipliers) {
                    gc = key.normal(index, static_cast<std::uint64_t>(2 * k));
                    gs = key.normal(index, static_cast<std::uint64_t>(2 * k + 1));
                } else {
                    gc = key.sign(index, static_cast<std::uint64_t>(2 * k));
                    gs = key.sign(index, static_cast<std::uint64_t>(2 * k + 1));
                }
                double w = kTwoPi * static_cast<double>(k);
                for (int j = 0; j < n; ++j) {
                    double x = grid.node(j);
                    v[j] += ak * (gc * std::cos(w * x) + gs * std::sin(w * x));
                }
            }
            break;
        }
        case NoiseKind::WhiteNoise: {
            double scale = std::sqrt(static_cast<double>(n));  // variance n = 1/dx per cell
            for (int j = 0; j < n; ++j)
                v[j] = scale * key.normal(index, static_cast<std::uint64_t>(j));
            break;
        }
        case NoiseKind::ConstantInSpace: {
            double x = draw_scalar(spec.law, spec.sigma, key, index, 0);
            for (int j = 0; j < n; ++j) v[j] = x;
            break;
        }
    }
}

PotentialSample center_spatially(const PotentialSample& p) {
    PotentialSample out = p;
    double mean = integrate(p.field);
    for (auto& x : out.field.values) x -= mean;
    return out;
}

RenewalPotential::RenewalPotential(const NoiseSpec& s, const TorusGrid& g, double tau_, rng::Key k)
    : spec(s), grid(&g), tau(tau_), key(k) {
    if (!(tau > 0.0)) throw std::invalid_argument("RenewalPotential: tau must be positive");
    spec.validate();
}

std::uint64_t RenewalPotential::index_at(double t) const {
    if (t < 0.0) throw std::invalid_argument("RenewalPotential: t must be nonnegative");
    return static_cast<std::uint64_t>(std::floor(t / tau));
}

PotentialSample RenewalPotential::at_time(double t) const { return sample(index_at(t)); }

double variance_functional(const NoiseSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case NoiseKind::PiecewiseConstant:
            return 0.5 * spec.sigma * spec.sigma * (1.0 - 1.0 / static_cast<double>(spec.m));
        case NoiseKind::HolderFourier: {
            double s = 0.0;
            for (int k = 1; k <= spec.fourier_cutoff; ++k) {
                double ak = std::pow(static_cast<double>(k), -(spec.alpha + 0.5));
                s += ak * ak;
            }
            return 0.5 * s;
        }
        case NoiseKind::ConstantInSpace:
            return 0.0;
        case NoiseKind::WhiteNoise:
            throw NotFinite("variance_functional: diverges for white noise");
    }
    return 0.0;
}

}  // namespace slowenv
