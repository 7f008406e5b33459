#include "slowenv/projective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slowenv/kernels.hpp"
#include "slowenv/propagator.hpp"

namespace slowenv {

namespace {
const double kTwoPi = 6.283185307179586477;
const double kSyncFloor = 1e-14;  // d_H below this is rounding noise
}  // namespace

NormalizeResult normalize(const Field& f) {
    const auto& ops = kernels::active();
    const TorusGrid& g = *f.grid;
    std::size_t n = static_cast<std::size_t>(g.n());

    NormalizeResult out;
    out.z.field.grid = &g;
    out.z.field.values = f.values;
    double* v = out.z.field.values.data();

    out.clamp_events = ops.clamp_floor(v, kEpsPos, n);
    double mass = g.dx() * ops.sum(v, n);
    if (!std::isfinite(mass)) throw NumericalBreakdown("normalize: non-finite mass");
    if (mass <= 4.0 * kEpsPos * static_cast<double>(n))
        throw DegenerateMass("normalize: field carries no usable mass");

    ops.scale(v, 1.0 / mass, n);
    out.log_mass = std::log(mass);
    out.z.log_values.resize(n);
    ops.log_fill(out.z.log_values.data(), v, n);
    return out;
}

ProjectiveDensity uniform_density(const TorusGrid& g) {
    return normalize(Field(g, 1.0)).z;
}

ProjectiveDensity cosine_bump_density(const TorusGrid& g) {
    Field f = Field::from_function(g, [](double x) { return std::exp(std::cos(kTwoPi * x)); });
    return normalize(f).z;
}

double hilbert_distance(const ProjectiveDensity& a, const ProjectiveDensity& b) {
    if (a.n() != b.n()) throw std::invalid_argument("hilbert_distance: size mismatch");
    if (a.log_values.empty() || b.log_values.empty())
        throw std::invalid_argument("hilbert_distance: density not normalized");
    double lo, hi;
    kernels::active().minmax_diff(a.log_values.data(), b.log_values.data(),
                                  a.log_values.size(), &lo, &hi);
    return hi - lo;
}

ProjectiveDensity random_density(const TorusGrid& g, rng::Key key, std::uint64_t index) {
    const auto& ops = kernels::active();
    std::size_t n = static_cast<std::size_t>(g.n());
    double scale = std::sqrt(static_cast<double>(n));
    Field w(g);
    for (std::size_t j = 0; j < n; ++j)
        w.values[j] = scale * key.normal(index, static_cast<std::uint64_t>(j));
    Field s = heat_apply(w, 0.01, 1.0);
    double lo, hi;
    ops.minmax(s.values.data(), n, &lo, &hi);
    if (hi > lo) ops.scale(s.values.data(), 2.0 / (hi - lo), n);
    Field e(g);
    ops.exp_fill(e.values.data(), s.values.data(), 1.0, n);
    return normalize(e).z;
}

SyncReport synchronization_rate(const ProjectiveDensity& u0_a, const ProjectiveDensity& u0_b,
                                const RenewalPotential& r, std::uint64_t n_periods,
                                const SchemeConfig& cfg) {
    if (n_periods < 2) throw std::invalid_argument("synchronization_rate: need n_periods >= 2");
    double d0 = hilbert_distance(u0_a, u0_b);
    if (d0 <= 0.0)
        throw std::invalid_argument("synchronization_rate: initial conditions coincide in d_H");

    SyncReport rep;
    rep.distances.reserve(n_periods + 1);
    rep.distances.push_back(d0);

    ProjectiveDensity za = u0_a;
    ProjectiveDensity zb = u0_b;
    HeatCache cache(*r.grid, cfg.kappa, r.tau);
    for (std::uint64_t i = 0; i < n_periods; ++i) {
        PotentialSample s = r.sample(i);
        PeriodOperator op(s, r.tau, cfg, &cache);
        za = op.apply(za).z_next;
        zb = op.apply(zb).z_next;
        rep.distances.push_back(hilbert_distance(za, zb));
    }

    // least squares on log d_H vs time; discard the first 10% as transient,
    // drop underflowed points
    std::size_t count = rep.distances.size();
    std::size_t discard = (count + 9) / 10;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = discard; i < count; ++i) {
        if (rep.distances[i] >= kSyncFloor)
            pts.emplace_back(static_cast<double>(i) * r.tau, std::log(rep.distances[i]));
        else
            rep.underflow = true;
    }
    if (pts.size() < 3) {
        // synchronization faster than the fit window: use whatever resolvable
        // points exist from the start (success condition, flagged)
        rep.underflow = true;
        pts.clear();
        for (std::size_t i = 0; i < count; ++i)
            if (rep.distances[i] >= kSyncFloor)
                pts.emplace_back(static_cast<double>(i) * r.tau, std::log(rep.distances[i]));
    }
    rep.points_used = pts.size();
    if (pts.size() >= 2) {
        double sx = 0, sy = 0;
        for (auto& p : pts) {
            sx += p.first;
            sy += p.second;
        }
        double mx = sx / pts.size(), my = sy / pts.size();
        double sxx = 0, sxy = 0;
        for (auto& p : pts) {
            sxx += (p.first - mx) * (p.first - mx);
            sxy += (p.first - mx) * (p.second - my);
        }
        if (sxx > 0) {
            rep.fitted_slope = sxy / sxx;
            if (pts.size() > 2) {
                double ssr = 0;
                for (auto& p : pts) {
                    double fit = my + rep.fitted_slope * (p.first - mx);
                    ssr += (p.second - fit) * (p.second - fit);
                }
                rep.slope_stderr = std::sqrt(ssr / static_cast<double>(pts.size() - 2) / sxx);
            }
        }
    }
    return rep;
}

BirkhoffEstimate birkhoff_coefficient_estimate(const PotentialSample& xi, double tau,
                                               const SchemeConfig& cfg, int n_pairs,
                                               rng::Key key) {
    if (n_pairs < 1) throw std::invalid_argument("birkhoff_coefficient_estimate: n_pairs >= 1");
    const TorusGrid& g = xi.grid();

    BirkhoffEstimate est;
    for (int p = 0; p < n_pairs; ++p) {
        ProjectiveDensity phi = random_density(g, key, static_cast<std::uint64_t>(2 * p));
        ProjectiveDensity psi = random_density(g, key, static_cast<std::uint64_t>(2 * p + 1));
        double d0 = hilbert_distance(phi, psi);
        if (d0 < 1e-12) continue;  // degenerate pair
        double d1 = propagate_pair_distance(phi, psi, xi, tau, cfg);
        double ratio = d1 / d0;
        if (ratio > est.mu_hat) {
            est.mu_hat = ratio;
            est.max_pair_d0 = d0;
            est.max_pair_d1 = d1;
        }
        ++est.pairs_used;
    }
    if (est.pairs_used == 0)
        throw std::invalid_argument("birkhoff_coefficient_estimate: all pairs degenerate");
    return est;
}

}  // namespace slowenv
