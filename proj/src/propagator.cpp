#include "slowenv/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "slowenv/kernels.hpp"

namespace slowenv {

namespace {
const double kTwoPi = 6.283185307179586477;
const double kRenormThreshold = 1e100;
}  // namespace

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::EigenExact: return "eigen";
        case Scheme::StrangSplit: return "strang";
        case Scheme::CrankNicolson: return "cn";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "eigen" || name == "eigen_exact") return Scheme::EigenExact;
    if (name == "strang" || name == "strang_split") return Scheme::StrangSplit;
    if (name == "cn" || name == "crank_nicolson") return Scheme::CrankNicolson;
    throw std::invalid_argument("unknown scheme: " + name);
}

void SchemeConfig::validate() const {
    if (!(dt_max > 0.0)) throw std::invalid_argument("SchemeConfig: dt_max must be positive");
    if (!(kappa > 0.0)) throw std::invalid_argument("SchemeConfig: kappa must be positive");
}

int strang_substeps(double tau, double dt_max, double xi_inf) {
    double cap = dt_max;
    if (xi_inf > 0.0) cap = std::min(cap, 1.0 / (10.0 * xi_inf));
    int m = static_cast<int>(std::ceil(tau / cap - 1e-12));
    return std::max(m, 1);
}

HeatCache::HeatCache(const TorusGrid& g, double kappa, double tau)
    : grid_(&g), kappa_(kappa), tau_(tau) {}

const StrangTables& HeatCache::get(int m) {
    auto it = by_m_.find(m);
    if (it != by_m_.end()) return it->second;

    StrangTables t;
    t.m = m;
    t.dt = tau_ / static_cast<double>(m);
    int hs = grid_->half_spectrum();
    t.half.resize(static_cast<std::size_t>(hs));
    t.full.resize(static_cast<std::size_t>(hs));
    double inv_n = 1.0 / static_cast<double>(grid_->n());
    for (int k = 0; k < hs; ++k) {
        double w = kTwoPi * static_cast<double>(k);
        double s = kappa_ * w * w;
        // 1/n folds the unnormalized FFTW roundtrip into the multiplier
        t.half[static_cast<std::size_t>(k)] = std::exp(-0.5 * t.dt * s) * inv_n;
        t.full[static_cast<std::size_t>(k)] = std::exp(-t.dt * s) * inv_n;
    }
    return by_m_.emplace(m, std::move(t)).first->second;
}

// ---------------------------------------------------------------------------

struct PeriodOperator::Impl {
    const TorusGrid* grid = nullptr;

    // StrangSplit
    HeatCache* heat = nullptr;
    std::unique_ptr<HeatCache> owned_heat;
    const StrangTables* tables = nullptr;
    AlignedVec reaction;  // exp(dt xi_j)
    AlignedVec spec;      // r2c scratch, 2*(n/2+1) doubles
    double growth = 1.0;  // max-norm growth bound per reaction substep

    // EigenExact
    std::unique_ptr<SymEigen> eig;
    std::vector<double> matrix;   // reused build buffer
    AlignedVec eig_factors;       // exp(tau (lambda_k - lambda_top))
    AlignedVec eig_coeffs;
    AlignedVec eig_accum;

    // CrankNicolson
    std::unique_ptr<CyclicTridiag> cn;
    AlignedVec xi_values;
    AlignedVec cn_rhs;
    double cn_offdiag = 0.0;
    double cn_dt = 0.0;
};

PeriodOperator::~PeriodOperator() = default;
PeriodOperator::PeriodOperator(PeriodOperator&&) noexcept = default;

PeriodOperator::PeriodOperator(const PotentialSample& xi, double tau, const SchemeConfig& cfg,
                               HeatCache* shared_heat)
    : impl_(std::make_unique<Impl>()), cfg_(cfg), tau_(tau) {
    cfg.validate();
    if (!(tau > 0.0)) throw std::invalid_argument("PeriodOperator: tau must be positive");
    impl_->grid = &xi.grid();
    if (cfg.scheme == Scheme::StrangSplit) {
        if (shared_heat) {
            impl_->heat = shared_heat;
        } else {
            impl_->owned_heat = std::make_unique<HeatCache>(*impl_->grid, cfg.kappa, tau);
            impl_->heat = impl_->owned_heat.get();
        }
    }
    rebind(xi);
}

void PeriodOperator::rebind(const PotentialSample& xi) {
    const TorusGrid& g = *impl_->grid;
    if (xi.field.grid != &g) throw std::invalid_argument("rebind: grid mismatch");
    const std::size_t n = static_cast<std::size_t>(g.n());
    const auto& ops = kernels::active();

    switch (cfg_.scheme) {
        case Scheme::StrangSplit: {
            double lo, hi;
            ops.minmax(xi.field.values.data(), n, &lo, &hi);
            double xi_inf = std::max(std::abs(lo), std::abs(hi));
            m_ = strang_substeps(tau_, cfg_.dt_max, xi_inf);
            impl_->tables = &impl_->heat->get(m_);
            impl_->reaction.resize(n);
            ops.exp_fill(impl_->reaction.data(), xi.field.values.data(), impl_->tables->dt, n);
            // per-substep growth of max|u|: the heat half is non-expansive
            impl_->growth = std::exp(impl_->tables->dt * xi_inf);
            impl_->spec.resize(2 * static_cast<std::size_t>(g.half_spectrum()));
            break;
        }
        case Scheme::EigenExact: {
            m_ = 1;
            impl_->matrix = periodic_schrodinger_matrix(g, xi.field.values.data(), cfg_.kappa);
            impl_->eig = std::make_unique<SymEigen>(sym_eigen(impl_->matrix, g.n()));
            impl_->eig_factors.resize(n);
            double top = impl_->eig->eigenvalues.back();
            for (std::size_t k = 0; k < n; ++k)
                impl_->eig_factors[k] = std::exp(tau_ * (impl_->eig->eigenvalues[k] - top));
            impl_->eig_coeffs.resize(n);
            impl_->eig_accum.resize(n);
            break;
        }
        case Scheme::CrankNicolson: {
            m_ = std::max(1, static_cast<int>(std::ceil(tau_ / cfg_.dt_max - 1e-12)));
            double dt = tau_ / static_cast<double>(m_);
            impl_->cn_dt = dt;
            double c = cfg_.kappa * static_cast<double>(g.n()) * static_cast<double>(g.n());
            impl_->cn_offdiag = -0.5 * dt * c;
            std::vector<double> diag(n), off(n, impl_->cn_offdiag);
            for (std::size_t j = 0; j < n; ++j)
                diag[j] = 1.0 + dt * c - 0.5 * dt * xi.field.values[j];
            impl_->cn = std::make_unique<CyclicTridiag>(diag, off);
            impl_->xi_values = xi.field.values;
            impl_->cn_rhs.resize(n);
            break;
        }
    }
}

double PeriodOperator::top_matrix_eigenvalue() const {
    if (!impl_->eig) throw std::logic_error("top_matrix_eigenvalue: EigenExact only");
    return impl_->eig->eigenvalues.back();
}

namespace {

// shared renormalization: scale every field by 1/mass(fields[0])
double renormalize_all(std::vector<AlignedVec*>& fields, double dx) {
    const auto& ops = kernels::active();
    double mass = dx * ops.sum(fields[0]->data(), fields[0]->size());
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw NumericalBreakdown("propagate: non-positive or non-finite mass during renormalization");
    double inv = 1.0 / mass;
    for (AlignedVec* f : fields) ops.scale(f->data(), inv, f->size());
    return std::log(mass);
}

double maybe_renormalize(std::vector<AlignedVec*>& fields, double dx) {
    const auto& ops = kernels::active();
    double lo, hi;
    ops.minmax(fields[0]->data(), fields[0]->size(), &lo, &hi);
    if (std::abs(hi) <= kRenormThreshold && std::abs(lo) <= kRenormThreshold) return 0.0;
    return renormalize_all(fields, dx);
}

}  // namespace

double PeriodOperator::apply_raw(std::vector<AlignedVec*> fields) {
    const auto& ops = kernels::active();
    const TorusGrid& g = *impl_->grid;
    const std::size_t n = static_cast<std::size_t>(g.n());
    for (AlignedVec* f : fields)
        if (f->size() != n) throw std::invalid_argument("apply_raw: field size mismatch");

    double log_renorm = 0.0;
    switch (cfg_.scheme) {
        case Scheme::StrangSplit: {
            auto* sc = reinterpret_cast<std::complex<double>*>(impl_->spec.data());
            std::size_t hs = static_cast<std::size_t>(g.half_spectrum());
            auto heat = [&](const AlignedVec& mult) {
                for (AlignedVec* f : fields) {
                    g.r2c(f->data(), sc);
                    ops.cmul_factors(impl_->spec.data(), mult.data(), hs);
                    g.c2r(sc, f->data());
                }
            };
            double lo, hi;
            ops.minmax(fields[0]->data(), n, &lo, &hi);
            double ub = std::max(std::abs(lo), std::abs(hi));  // heat is non-expansive in max norm
            heat(impl_->tables->half);
            for (int step = 0; step < m_; ++step) {
                for (AlignedVec* f : fields) ops.mul(f->data(), impl_->reaction.data(), n);
                ub *= impl_->growth;
                if (!(ub <= kRenormThreshold)) {
                    log_renorm += renormalize_all(fields, g.dx());
                    ops.minmax(fields[0]->data(), n, &lo, &hi);
                    ub = std::max(std::abs(lo), std::abs(hi));
                }
                heat(step + 1 < m_ ? impl_->tables->full : impl_->tables->half);
            }
            break;
        }
        case Scheme::EigenExact: {
            const SymEigen& e = *impl_->eig;
            for (AlignedVec* f : fields) {
                for (std::size_t k = 0; k < n; ++k)
                    impl_->eig_coeffs[k] = ops.dot(e.column(static_cast<int>(k)), f->data(), n);
                for (std::size_t j = 0; j < n; ++j) impl_->eig_accum[j] = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    double a = impl_->eig_factors[k] * impl_->eig_coeffs[k];
                    if (a != 0.0)
                        ops.axpy(impl_->eig_accum.data(), a, e.column(static_cast<int>(k)), n);
                }
                for (std::size_t j = 0; j < n; ++j) (*f)[j] = impl_->eig_accum[j];
            }
            log_renorm = tau_ * impl_->eig->eigenvalues.back();
            break;
        }
        case Scheme::CrankNicolson: {
            double c = cfg_.kappa * static_cast<double>(g.n()) * static_cast<double>(g.n());
            double dt = impl_->cn_dt;
            for (int step = 0; step < m_; ++step) {
                for (AlignedVec* f : fields) {
                    double* u = f->data();
                    for (std::size_t j = 0; j < n; ++j) {
                        std::size_t up = (j + 1) % n;
                        std::size_t dn = (j + n - 1) % n;
                        double lap = c * (u[up] - 2.0 * u[j] + u[dn]);
                        impl_->cn_rhs[j] = u[j] + 0.5 * dt * (lap + impl_->xi_values[j] * u[j]);
                    }
                    impl_->cn->solve(impl_->cn_rhs.data(), u);
                }
                log_renorm += maybe_renormalize(fields, g.dx());
            }
            break;
        }
    }
    return log_renorm;
}

PeriodResult PeriodOperator::apply(const ProjectiveDensity& z) {
    AlignedVec u = z.field.values;
    double lr = apply_raw({&u});
    Field f;
    f.grid = impl_->grid;
    f.values = std::move(u);
    NormalizeResult nr = normalize(f);
    PeriodResult out;
    out.z_next = std::move(nr.z);
    out.log_mass = lr + nr.log_mass;
    out.clamp_events = nr.clamp_events;
    if (!std::isfinite(out.log_mass))
        throw NumericalBreakdown("propagate_period: non-finite log-mass (scheme=" +
                                 std::string(scheme_name(cfg_.scheme)) + ")");
    return out;
}

PeriodResult propagate_period(const ProjectiveDensity& z, const PotentialSample& xi, double tau,
                              const SchemeConfig& cfg) {
    PeriodOperator op(xi, tau, cfg);
    return op.apply(z);
}

double propagate_pair_distance(const ProjectiveDensity& phi, const ProjectiveDensity& psi,
                               const PotentialSample& xi, double tau, const SchemeConfig& cfg) {
    const auto& ops = kernels::active();
    const TorusGrid& g = *phi.field.grid;
    const std::size_t n = static_cast<std::size_t>(g.n());

    AlignedVec V = psi.field.values;
    AlignedVec U = phi.field.values;
    AlignedVec D(n);
    for (std::size_t j = 0; j < n; ++j) D[j] = U[j] - V[j];
    // remove the spurious constant component (both inputs have unit mass)
    double mean = g.dx() * ops.sum(D.data(), n);
    for (std::size_t j = 0; j < n; ++j) D[j] -= mean;

    PeriodOperator op(xi, tau, cfg);
    op.apply_raw({&V, &U, &D});

    double lo_v, hi_v, lo_u, hi_u;
    ops.minmax(V.data(), n, &lo_v, &hi_v);
    ops.minmax(U.data(), n, &lo_u, &hi_u);
    if (lo_v > 0.0 && lo_u > 0.0) {
        // d_H(U, V) = range of log(U/V) = range of log1p(D/V): resolved down
        // to the amplitude of the propagated difference, far below the
        // cancellation floor of subtracting the two log fields
        double mn = 0.0, mx = 0.0;
        bool first = true;
        for (std::size_t j = 0; j < n; ++j) {
            double r = std::log1p(D[j] / V[j]);
            if (first) {
                mn = mx = r;
                first = false;
            } else {
                mn = std::min(mn, r);
                mx = std::max(mx, r);
            }
        }
        return mx - mn;
    }
    // tiny negative overshoots: fall back to clamped logs
    ops.clamp_floor(U.data(), kEpsPos, n);
    ops.clamp_floor(V.data(), kEpsPos, n);
    AlignedVec lu(n), lv(n);
    ops.log_fill(lu.data(), U.data(), n);
    ops.log_fill(lv.data(), V.data(), n);
    double lo, hi;
    ops.minmax_diff(lu.data(), lv.data(), n, &lo, &hi);
    return hi - lo;
}

EvolveResult evolve(const ProjectiveDensity& u0, const RenewalPotential& r,
                    std::uint64_t n_periods, const SchemeConfig& cfg, std::uint64_t start_index,
                    bool keep_increments) {
    if (n_periods < 1) throw std::invalid_argument("evolve: need n_periods >= 1");
    cfg.validate();
    const auto& ops = kernels::active();
    const TorusGrid& g = *r.grid;
    const std::size_t n = static_cast<std::size_t>(g.n());

    AlignedVec u = u0.field.values;
    HeatCache cache(g, cfg.kappa, r.tau);
    EvolveResult out;
    if (keep_increments) out.increments.reserve(n_periods);

    PotentialSample s;
    sample_potential_into(s, r.spec, g, r.key, start_index);
    PeriodOperator op(s, r.tau, cfg, &cache);
    std::vector<AlignedVec*> field_set = {&u};
    for (std::uint64_t i = 0; i < n_periods; ++i) {
        if (i > 0) {
            sample_potential_into(s, r.spec, g, r.key, start_index + i);
            op.rebind(s);
        }
        double lr = op.apply_raw(field_set);
        out.clamp_events += ops.clamp_floor(u.data(), kEpsPos, n);
        double mass = g.dx() * ops.sum(u.data(), n);
        if (!std::isfinite(mass))
            throw NumericalBreakdown("evolve: non-finite mass at period " + std::to_string(i) +
                                     " (scheme=" + scheme_name(cfg.scheme) + ")");
        if (mass <= 4.0 * kEpsPos * static_cast<double>(n))
            throw DegenerateMass("evolve: mass collapsed at period " + std::to_string(i));
        double inc = lr + std::log(mass);
        ops.scale(u.data(), 1.0 / mass, n);
        out.total_log_mass += inc;
        if (keep_increments) out.increments.push_back(inc);
    }

    Field f;
    f.grid = &g;
    f.values = std::move(u);
    out.z_final = normalize(f).z;
    return out;
}

FeynmanKacResult feynman_kac_mass(const PotentialSample& xi, double tau,
                                  const ProjectiveDensity& z, std::uint64_t n_paths, double dt_fk,
                                  double kappa, rng::Key key) {
    if (xi.kind == NoiseKind::WhiteNoise)
        throw Unsupported("feynman_kac_mass: white noise paths are not grid-stable");
    if (!(dt_fk > 0.0) || dt_fk > tau)
        throw std::invalid_argument("feynman_kac_mass: need 0 < dt_fk <= tau");
    if (n_paths < 1) throw std::invalid_argument("feynman_kac_mass: need n_paths >= 1");

    const TorusGrid& g = xi.grid();
    const int n = g.n();
    const double* pot = xi.field.values.data();
    const double* zv = z.field.values.data();

    int steps = std::max(1, static_cast<int>(std::ceil(tau / dt_fk - 1e-12)));
    double dt = tau / static_cast<double>(steps);
    double sigma_step = std::sqrt(2.0 * kappa * dt);

    auto nearest = [n](double x) {
        int j = static_cast<int>(std::lround(x * n)) % n;
        return j < 0 ? j + n : j;
    };

    // Welford accumulation: exactly zero variance for path-independent weights
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t p = 0; p < n_paths; ++p) {
        double x = key.uniform(p, 0);
        double integral = 0.0;
        for (int k = 0; k < steps; ++k) {
            integral += pot[nearest(x)] * dt;  // left endpoint
            x += sigma_step * key.normal(p, static_cast<std::uint64_t>(k) + 1);
            x -= std::floor(x);
        }
        double w = zv[nearest(x)] * std::exp(integral);
        double delta = w - mean;
        mean += delta / static_cast<double>(p + 1);
        m2 += delta * (w - mean);
    }
    FeynmanKacResult out;
    out.estimate = mean;
    if (n_paths > 1)
        out.stderr_ = std::sqrt(std::max(m2, 0.0) /
                                (static_cast<double>(n_paths - 1) * static_cast<double>(n_paths)));
    return out;
}

}  // namespace slowenv
