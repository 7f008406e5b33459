#include "slowenv/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "slowenv/kernels.hpp"
#include "slowenv/linalg.hpp"
#include "slowenv/parallel.hpp"
#include "slowenv/propagator.hpp"

namespace slowenv {

EigenPair top_eigenpair(const PotentialSample& xi, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("top_eigenpair: kappa must be positive");
    const TorusGrid& g = xi.grid();
    const std::size_t n = static_cast<std::size_t>(g.n());
    const auto& ops = kernels::active();

    std::vector<double> h = periodic_schrodinger_matrix(g, xi.field.values.data(), kappa);
    SymEigen e = sym_eigen(h, g.n());

    // Perron vector: top of the ascending spectrum, sign-fixed positive
    AlignedVec q(n);
    const double* top = e.column(g.n() - 1);
    double s = ops.sum(top, n);
    double flip = (s < 0.0) ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) q[j] = flip * top[j];

    double lo, hi;
    ops.minmax(q.data(), n, &lo, &hi);
    if (lo < -1e-10 * hi)
        throw PerronViolation("top_eigenpair: top eigenvector is not single-signed");

    // Rayleigh polish of the eigenvalue (the quotient is insensitive to the
    // eigenvector error at first order)
    AlignedVec hq(n);
    for (std::size_t j = 0; j < n; ++j) hq[j] = 0.0;
    for (std::size_t col = 0; col < n; ++col)
        ops.axpy(hq.data(), q[col], h.data() + col * n, n);
    double zeta = ops.dot(q.data(), hq.data(), n) / ops.dot(q.data(), q.data(), n);

    EigenPair out;
    out.zeta = zeta;

    Field f;
    f.grid = &g;
    f.values = std::move(q);
    out.psi = normalize(f).z;

    // residual on the normalized eigenfunction
    double psi_max = 0.0, psi_lo = 0.0;
    ops.minmax(out.psi.field.values.data(), n, &psi_lo, &psi_max);
    for (std::size_t j = 0; j < n; ++j) hq[j] = 0.0;
    for (std::size_t col = 0; col < n; ++col)
        ops.axpy(hq.data(), out.psi.field.values[col], h.data() + col * n, n);
    double rmax = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        rmax = std::max(rmax, std::abs(hq[j] - zeta * out.psi.field.values[j]));
    out.residual = rmax / psi_max;
    return out;
}

double doob_mu(const EigenPair& pair) {
    double lo, hi;
    kernels::active().minmax(pair.psi.log_values.data(), pair.psi.log_values.size(), &lo, &hi);
    return hi - lo;
}

DoobCheck doob_consistency_check(const PotentialSample& xi, double tau, double kappa) {
    EigenPair pair = top_eigenpair(xi, kappa);
    SchemeConfig cfg;
    cfg.scheme = Scheme::EigenExact;
    cfg.kappa = kappa;
    PeriodResult r = propagate_period(pair.psi, xi, tau, cfg);
    DoobCheck out;
    out.dh_defect = hilbert_distance(r.z_next, pair.psi);
    out.mass_defect = std::abs(r.log_mass - tau * pair.zeta);
    return out;
}

BoundsReport sandwich_bounds(const NoiseSpec& spec, const TorusGrid& g, double kappa, double tau,
                             int n_samples, double lambda_hat, double lambda_stderr, rng::Key key,
                             int threads) {
    if (n_samples < 30) throw std::invalid_argument("sandwich_bounds: need n_samples >= 30");
    if (!(tau > 0.0)) throw std::invalid_argument("sandwich_bounds: tau must be positive");

    std::vector<double> zetas(static_cast<std::size_t>(n_samples));
    std::vector<double> mus(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples), threads, [&](std::size_t i) {
        PotentialSample xi = sample_potential(spec, g, key, i);
        EigenPair pair = top_eigenpair(xi, kappa);
        zetas[i] = pair.zeta;
        mus[i] = doob_mu(pair);
    });

    auto mean_se = [&](const std::vector<double>& v, double& mean, double& se) {
        double s = 0.0;
        for (double x : v) s += x;
        mean = s / static_cast<double>(v.size());
        double q = 0.0;
        for (double x : v) q += (x - mean) * (x - mean);
        se = v.size() > 1
                 ? std::sqrt(q / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))
                 : 0.0;
    };

    BoundsReport rep;
    rep.n_samples = n_samples;
    mean_se(zetas, rep.zeta_mean, rep.zeta_stderr);
    mean_se(mus, rep.mu_mean, rep.mu_stderr);
    rep.lower = rep.zeta_mean - rep.mu_mean / tau;
    rep.lambda_hat = lambda_hat;
    rep.lambda_stderr = lambda_stderr;

    double se_up = std::sqrt(rep.zeta_stderr * rep.zeta_stderr + lambda_stderr * lambda_stderr);
    double se_lo = std::sqrt(rep.zeta_stderr * rep.zeta_stderr +
                             (rep.mu_stderr / tau) * (rep.mu_stderr / tau) +
                             lambda_stderr * lambda_stderr);
    rep.upper_ok = lambda_hat <= rep.zeta_mean + 3.0 * se_up;
    rep.lower_ok = lambda_hat >= rep.lower - 3.0 * se_lo;
    return rep;
}

}  // namespace slowenv
