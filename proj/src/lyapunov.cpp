#include "slowenv/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slowenv/parallel.hpp"
#include "slowenv/projective.hpp"

namespace slowenv {

namespace {
const double kSyncTarget = 1e-8;

// stream tags for the independent sub-streams of one run
enum : std::uint64_t { kTagBurnInProbe = 0x1001, kTagChain = 0x2000, kTagEval = 0x3000 };
}  // namespace

void RunConfig::validate() const {
    noise.validate();
    scheme_config().validate();
    if (!(tau > 0.0)) throw std::invalid_argument("RunConfig: tau must be positive");
    if (grid_n < 2) throw std::invalid_argument("RunConfig: grid_n must be >= 2");
    if (n_periods < 1) throw std::invalid_argument("RunConfig: n_periods must be >= 1");
    if (replicas < 1) throw std::invalid_argument("RunConfig: replicas must be >= 1");
    if (batch_count < 2) throw std::invalid_argument("RunConfig: batch_count must be >= 2");
    if (n_periods < 10 * static_cast<std::uint64_t>(batch_count))
        throw std::invalid_argument("RunConfig: batch means need n_periods >= 10*batch_count");
    if (threads < 1) throw std::invalid_argument("RunConfig: threads must be >= 1");
}

BurnIn determine_burn_in(const NoiseSpec& spec, const TorusGrid& g, double tau,
                         const SchemeConfig& scheme, rng::Key key, std::uint64_t cap) {
    RenewalPotential r(spec, g, tau, key);
    ProjectiveDensity za = uniform_density(g);
    ProjectiveDensity zb = cosine_bump_density(g);
    HeatCache cache(g, scheme.kappa, tau);

    BurnIn out;
    std::uint64_t i = 0;
    double d = hilbert_distance(za, zb);
    while (d >= kSyncTarget && i < cap) {
        PotentialSample s = r.sample(i);
        PeriodOperator op(s, tau, scheme, &cache);
        za = op.apply(za).z_next;
        zb = op.apply(zb).z_next;
        d = hilbert_distance(za, zb);
        ++i;
    }
    if (d >= kSyncTarget) {
        out.periods = cap;
        out.capped = true;
    } else {
        out.periods = static_cast<std::uint64_t>(std::ceil(1.25 * static_cast<double>(i)));
    }
    return out;
}

namespace {

ReplicaStats batch_means(const std::vector<double>& increments, double tau, int batch_count) {
    ReplicaStats st;
    std::uint64_t len = increments.size() / static_cast<std::uint64_t>(batch_count);
    std::uint64_t used = len * static_cast<std::uint64_t>(batch_count);
    st.periods_used = used;
    std::vector<double> means(static_cast<std::size_t>(batch_count), 0.0);
    for (std::uint64_t i = 0; i < used; ++i) {
        means[static_cast<std::size_t>(i / len)] += increments[static_cast<std::size_t>(i)];
        st.total_log_mass += increments[static_cast<std::size_t>(i)];
    }
    double denom = tau * static_cast<double>(len);
    double s = 0.0;
    for (auto& m : means) {
        m /= denom;
        s += m;
    }
    double mean = s / batch_count;
    // mean of equal-length batch means == overall mean: lambda * tau * used
    // reproduces total_log_mass exactly up to summation order
    st.lambda = mean;
    double q = 0.0;
    for (double m : means) q += (m - mean) * (m - mean);
    st.stderr_ = std::sqrt(q / static_cast<double>(batch_count - 1) /
                           static_cast<double>(batch_count));
    return st;
}

LyapunovEstimate pool_replicas(const std::vector<ReplicaStats>& reps, double tau) {
    LyapunovEstimate est;
    est.tau = tau;
    est.replicas = reps;
    bool all_zero_se = true;
    for (const auto& r : reps) all_zero_se = all_zero_se && r.stderr_ == 0.0;
    if (all_zero_se) {
        double s = 0.0;
        for (const auto& r : reps) s += r.lambda;
        est.lambda_hat = s / static_cast<double>(reps.size());
        est.stderr_ = 0.0;
    } else {
        // inverse-variance weights; degenerate replicas dominate via the floor
        double wsum = 0.0, s = 0.0;
        for (const auto& r : reps) {
            double w = 1.0 / std::max(r.stderr_ * r.stderr_, 1e-300);
            wsum += w;
            s += w * r.lambda;
        }
        est.lambda_hat = s / wsum;
        est.stderr_ = std::sqrt(1.0 / wsum);
    }
    for (const auto& r : reps) {
        est.total_log_mass += r.total_log_mass;
        est.n_periods_used = r.periods_used;  // identical across replicas
    }
    return est;
}

}  // namespace

LyapunovEstimate estimate_time_average(const RunConfig& cfg, const TorusGrid& g) {
    return estimate_time_average(cfg, g, nullptr);
}

LyapunovEstimate estimate_time_average(const RunConfig& cfg, const TorusGrid& g,
                                       const ProjectiveDensity* u0) {
    cfg.validate();
    SchemeConfig scheme = cfg.scheme_config();

    BurnIn burn{cfg.burn_in_fixed, false};
    if (cfg.burn_in_auto)
        burn = determine_burn_in(cfg.noise, g, cfg.tau, scheme,
                                 rng::Key{cfg.seed, rng::substream(0, kTagBurnInProbe)},
                                 cfg.burn_in_cap);

    std::vector<ReplicaStats> reps(static_cast<std::size_t>(cfg.replicas));
    std::vector<std::uint64_t> clamps(static_cast<std::size_t>(cfg.replicas), 0);
    parallel_for(static_cast<std::size_t>(cfg.replicas), cfg.threads, [&](std::size_t rep) {
        rng::Key chain{cfg.seed, rng::substream(0, kTagChain + rep)};
        RenewalPotential pot(cfg.noise, g, cfg.tau, chain);
        ProjectiveDensity start = u0 ? *u0 : uniform_density(g);
        std::uint64_t first = 0;
        if (burn.periods > 0) {
            EvolveResult warm = evolve(start, pot, burn.periods, scheme, 0, false);
            start = std::move(warm.z_final);
            first = burn.periods;
            clamps[rep] += warm.clamp_events;
        }
        EvolveResult run = evolve(start, pot, cfg.n_periods, scheme, first, true);
        clamps[rep] += run.clamp_events;
        reps[rep] = batch_means(run.increments, cfg.tau, cfg.batch_count);
    });

    LyapunovEstimate est = pool_replicas(reps, cfg.tau);
    est.burn_in_used = burn.periods;
    est.burn_in_capped = burn.capped;
    for (auto c : clamps) est.clamp_events += c;
    return est;
}

LyapunovEstimate estimate_furstenberg(const RunConfig& cfg, const TorusGrid& g, int n_outer) {
    cfg.validate();
    if (n_outer < 30) throw std::invalid_argument("estimate_furstenberg: need n_outer >= 30");
    SchemeConfig scheme = cfg.scheme_config();

    BurnIn burn{cfg.burn_in_fixed, false};
    if (cfg.burn_in_auto)
        burn = determine_burn_in(cfg.noise, g, cfg.tau, scheme,
                                 rng::Key{cfg.seed, rng::substream(0, kTagBurnInProbe)},
                                 cfg.burn_in_cap);
    std::uint64_t warm = std::max<std::uint64_t>(burn.periods, 1);

    std::vector<double> values(static_cast<std::size_t>(n_outer));
    std::vector<std::uint64_t> clamps(static_cast<std::size_t>(n_outer), 0);
    parallel_for(static_cast<std::size_t>(n_outer), cfg.threads, [&](std::size_t i) {
        // stream A: burn-in chain producing an approximate z_inf(omega')
        rng::Key burn_key{cfg.seed, rng::substream(1, kTagChain + i)};
        RenewalPotential pot(cfg.noise, g, cfg.tau, burn_key);
        EvolveResult chain = evolve(uniform_density(g), pot, warm, scheme, 0, false);
        clamps[i] += chain.clamp_events;
        // stream B: one evaluation period with a never-before-used environment
        rng::Key eval_key{cfg.seed, rng::substream(1, kTagEval + i)};
        PotentialSample fresh = sample_potential(cfg.noise, g, eval_key, 0);
        PeriodOperator op(fresh, cfg.tau, scheme);
        PeriodResult r = op.apply(chain.z_final);
        clamps[i] += r.clamp_events;
        values[i] = r.log_mass / cfg.tau;
    });

    LyapunovEstimate est;
    est.tau = cfg.tau;
    est.burn_in_used = warm;
    est.burn_in_capped = burn.capped;
    est.n_periods_used = static_cast<std::uint64_t>(n_outer);
    double s = 0.0;
    for (double v : values) s += v;
    est.lambda_hat = s / static_cast<double>(n_outer);
    double q = 0.0;
    for (double v : values) {
        q += (v - est.lambda_hat) * (v - est.lambda_hat);
        est.total_log_mass += v * cfg.tau;
    }
    est.stderr_ = n_outer > 1 ? std::sqrt(q / static_cast<double>(n_outer - 1) /
                                          static_cast<double>(n_outer))
                              : 0.0;
    for (auto c : clamps) est.clamp_events += c;
    return est;
}

std::vector<SweepRow> sweep_tau(const RunConfig& base, const TorusGrid& g,
                                const std::vector<double>& taus) {
    if (taus.empty()) throw std::invalid_argument("sweep_tau: need at least one tau");
    std::vector<SweepRow> rows;
    rows.reserve(taus.size());
    for (double tau : taus) {
        SweepRow row;
        row.tau = tau;
        RunConfig cfg = base;
        cfg.tau = tau;
        try {
            row.estimate = estimate_time_average(cfg, g);
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace slowenv
