#include "slowenv/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slowenv/parallel.hpp"
#include "slowenv/projective.hpp"
#include "slowenv/propagator.hpp"
#include "slowenv/spectral.hpp"

namespace slowenv {

const char* const kResultHeader =
    "run_id,subcommand,noise_kind,noise_params,kappa,tau,n_grid,scheme,dt_max,n_periods,"
    "burn_in,seed,lambda_hat,stderr,target,extrapolated,zeta_mean,mu_mean,slope,"
    "mu_hat_birkhoff,clamp_events,wall_time_s";

namespace {

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num17(*v) : std::string(); }
std::string opt_u(const std::optional<std::uint64_t>& v) {
    return v ? std::to_string(*v) : std::string();
}

}  // namespace

std::string format_row_csv(const ResultRow& r) {
    std::ostringstream os;
    os << r.run_id << ',' << r.subcommand << ',' << r.noise_kind << ',' << r.noise_params << ','
       << num17(r.kappa) << ',' << opt(r.tau) << ',' << r.n_grid << ',' << r.scheme << ','
       << num17(r.dt_max) << ',' << opt_u(r.n_periods) << ',' << opt_u(r.burn_in) << ','
       << r.seed << ',' << opt(r.lambda_hat) << ',' << opt(r.stderr_) << ',' << opt(r.target)
       << ',' << opt(r.extrapolated) << ',' << opt(r.zeta_mean) << ',' << opt(r.mu_mean) << ','
       << opt(r.slope) << ',' << opt(r.mu_hat_birkhoff) << ',' << r.clamp_events << ','
       << num17(r.wall_time_s);
    return os.str();
}

std::string format_row_json(const ResultRow& r) {
    nlohmann::json j;
    j["run_id"] = r.run_id;
    j["subcommand"] = r.subcommand;
    j["noise_kind"] = r.noise_kind;
    j["noise_params"] = r.noise_params;
    j["kappa"] = r.kappa;
    if (r.tau) j["tau"] = *r.tau;
    j["n_grid"] = r.n_grid;
    j["scheme"] = r.scheme;
    j["dt_max"] = r.dt_max;
    if (r.n_periods) j["n_periods"] = *r.n_periods;
    if (r.burn_in) j["burn_in"] = *r.burn_in;
    j["seed"] = r.seed;
    if (r.lambda_hat) j["lambda_hat"] = *r.lambda_hat;
    if (r.stderr_) j["stderr"] = *r.stderr_;
    if (r.target) j["target"] = *r.target;
    if (r.extrapolated) j["extrapolated"] = *r.extrapolated;
    if (r.zeta_mean) j["zeta_mean"] = *r.zeta_mean;
    if (r.mu_mean) j["mu_mean"] = *r.mu_mean;
    if (r.slope) j["slope"] = *r.slope;
    if (r.mu_hat_birkhoff) j["mu_hat_birkhoff"] = *r.mu_hat_birkhoff;
    j["clamp_events"] = r.clamp_events;
    j["wall_time_s"] = r.wall_time_s;
    return j.dump();
}

ResultRow parse_row_csv(const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            f.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    f.push_back(cur);
    if (f.size() != 22) throw std::invalid_argument("parse_row_csv: expected 22 fields");

    auto dbl = [](const std::string& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        return std::strtod(s.c_str(), nullptr);
    };
    auto u64 = [](const std::string& s) -> std::optional<std::uint64_t> {
        if (s.empty()) return std::nullopt;
        return std::strtoull(s.c_str(), nullptr, 10);
    };

    ResultRow r;
    r.run_id = f[0];
    r.subcommand = f[1];
    r.noise_kind = f[2];
    r.noise_params = f[3];
    r.kappa = std::strtod(f[4].c_str(), nullptr);
    r.tau = dbl(f[5]);
    r.n_grid = std::atoi(f[6].c_str());
    r.scheme = f[7];
    r.dt_max = std::strtod(f[8].c_str(), nullptr);
    r.n_periods = u64(f[9]);
    r.burn_in = u64(f[10]);
    r.seed = std::strtoull(f[11].c_str(), nullptr, 10);
    r.lambda_hat = dbl(f[12]);
    r.stderr_ = dbl(f[13]);
    r.target = dbl(f[14]);
    r.extrapolated = dbl(f[15]);
    r.zeta_mean = dbl(f[16]);
    r.mu_mean = dbl(f[17]);
    r.slope = dbl(f[18]);
    r.mu_hat_birkhoff = dbl(f[19]);
    r.clamp_events = std::strtoull(f[20].c_str(), nullptr, 10);
    r.wall_time_s = std::strtod(f[21].c_str(), nullptr);
    return r;
}

namespace {

ResultRow base_row(const CliConfig& cfg) {
    ResultRow r;
    r.run_id = run_id_for(cfg);
    r.subcommand = cfg.subcommand;
    r.noise_kind = cfg.run.noise.kind_name();
    r.noise_params = cfg.run.noise.params_string();
    r.kappa = cfg.run.kappa;
    r.tau = cfg.run.tau;
    r.n_grid = cfg.run.grid_n;
    r.scheme = scheme_name(cfg.run.scheme);
    r.dt_max = cfg.run.dt_max;
    r.seed = cfg.run.seed;
    return r;
}

void fill_estimate(ResultRow& r, const LyapunovEstimate& est) {
    r.lambda_hat = est.lambda_hat;
    r.stderr_ = est.stderr_;
    r.n_periods = est.n_periods_used;
    r.burn_in = est.burn_in_used;
    r.clamp_events = est.clamp_events;
}

PotentialSample cosine_probe(const TorusGrid& g) {
    PotentialSample p;
    p.kind = NoiseKind::HolderFourier;
    p.field = Field::from_function(
        g, [](double x) { return std::cos(2.0 * 3.14159265358979323846 * x); });
    return p;
}

void warn_grid_rule(const CliConfig& cfg, const TorusGrid& g) {
    if (cfg.run.noise.kind != NoiseKind::WhiteNoise) return;
    double required = std::sqrt(cfg.run.kappa * cfg.run.tau) / 8.0;
    if (g.dx() > required)
        std::fprintf(stderr,
                     "[slowenv] warning: dx=%g exceeds sqrt(kappa tau)/8=%g; white-noise "
                     "small-tau runs want n >= %d\n",
                     g.dx(), required, static_cast<int>(std::ceil(1.0 / required)));
}

std::vector<ResultRow> dispatch(const CliConfig& cfg) {
    std::vector<ResultRow> rows;
    TorusGrid g = make_grid(cfg.run.grid_n);

    if (cfg.subcommand == "lyapunov") {
        warn_grid_rule(cfg, g);
        ResultRow r = base_row(cfg);
        fill_estimate(r, estimate_time_average(cfg.run, g));
        rows.push_back(std::move(r));
    } else if (cfg.subcommand == "furstenberg") {
        warn_grid_rule(cfg, g);
        ResultRow r = base_row(cfg);
        fill_estimate(r, estimate_furstenberg(cfg.run, g, cfg.n_outer));
        rows.push_back(std::move(r));
    } else if (cfg.subcommand == "sweep") {
        if (cfg.taus.empty()) throw ConfigError(5, "sweep needs a nonempty taus array");
        std::vector<double> taus = cfg.taus;
        std::sort(taus.begin(), taus.end());
        for (const SweepRow& s : sweep_tau(cfg.run, g, taus)) {
            ResultRow r = base_row(cfg);
            r.tau = s.tau;
            if (s.failed) {
                r.lambda_hat = std::nan("");
                std::fprintf(stderr, "[slowenv] sweep tau=%g failed: %s\n", s.tau,
                             s.error.c_str());
            } else {
                fill_estimate(r, s.estimate);
            }
            rows.push_back(std::move(r));
        }
    } else if (cfg.subcommand == "smalltau") {
        if (cfg.taus.empty()) throw ConfigError(5, "smalltau needs a nonempty taus array");
        LimitFitReport rep = small_tau_slope(cfg.run, g, cfg.taus);
        for (const RatioPoint& p : rep.points) {
            ResultRow r = base_row(cfg);
            r.tau = p.tau;
            r.lambda_hat = p.ratio * p.tau;
            r.stderr_ = p.stderr_ * p.tau;
            r.n_periods = p.periods;
            rows.push_back(std::move(r));
        }
        ResultRow s = base_row(cfg);
        s.tau = 0.0;
        s.target = rep.target;
        s.extrapolated = rep.extrapolated;
        s.stderr_ = rep.extrapolated_stderr;
        rows.push_back(std::move(s));
        std::fprintf(stderr, "[slowenv] smalltau extrapolated=%.6g target=%.6g gap=%.2f%%%s\n",
                     rep.extrapolated, rep.target, 100.0 * rep.relative_gap,
                     rep.under_resolved ? " (under-resolved)" : "");
    } else if (cfg.subcommand == "sqrtlaw") {
        if (cfg.taus.empty()) throw ConfigError(5, "sqrtlaw needs a nonempty taus array");
        LimitFitReport rep;
        try {
            rep = sqrt_law_fit(cfg.run, cfg.taus, cfg.chaos_convention);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(5, e.what());
        }
        for (const RatioPoint& p : rep.points) {
            ResultRow r = base_row(cfg);
            r.tau = p.tau;
            r.lambda_hat = p.ratio * std::sqrt(p.tau);
            r.stderr_ = p.stderr_ * std::sqrt(p.tau);
            r.n_periods = p.periods;
            rows.push_back(std::move(r));
        }
        ResultRow s = base_row(cfg);
        s.tau = 0.0;
        s.target = rep.target;
        s.extrapolated = rep.extrapolated;
        s.stderr_ = rep.extrapolated_stderr;
        rows.push_back(std::move(s));
        std::fprintf(stderr,
                     "[slowenv] sqrtlaw extrapolated=%.6g derived-target=%.6g (s-limit=%.6g, "
                     "closed form sqrt(pi/kappa)=%.6g) gap-to-target=%.2f%% "
                     "gap-to-closed-form=%.2f%%\n",
                     rep.extrapolated, rep.target, rep.s_limit, rep.closed_form,
                     100.0 * rep.relative_gap,
                     100.0 * std::abs(rep.extrapolated - rep.closed_form) / rep.closed_form);
    } else if (cfg.subcommand == "spectrum") {
        std::vector<double> zetas(static_cast<std::size_t>(cfg.n_samples));
        std::vector<double> mus(static_cast<std::size_t>(cfg.n_samples));
        rng::Key key{cfg.run.seed, rng::substream(3, 0x5bec)};
        parallel_for(static_cast<std::size_t>(cfg.n_samples), cfg.run.threads, [&](std::size_t i) {
            EigenPair p = top_eigenpair(sample_potential(cfg.run.noise, g, key, i), cfg.run.kappa);
            zetas[i] = p.zeta;
            mus[i] = doob_mu(p);
        });
        double zm = 0, mm = 0;
        for (int i = 0; i < cfg.n_samples; ++i) {
            zm += zetas[static_cast<std::size_t>(i)];
            mm += mus[static_cast<std::size_t>(i)];
        }
        zm /= cfg.n_samples;
        mm /= cfg.n_samples;
        double zq = 0;
        for (int i = 0; i < cfg.n_samples; ++i)
            zq += (zetas[static_cast<std::size_t>(i)] - zm) * (zetas[static_cast<std::size_t>(i)] - zm);
        ResultRow r = base_row(cfg);
        r.tau = std::nullopt;
        r.zeta_mean = zm;
        r.mu_mean = mm;
        r.stderr_ = cfg.n_samples > 1
                        ? std::sqrt(zq / (cfg.n_samples - 1) / cfg.n_samples)
                        : 0.0;
        r.n_periods = static_cast<std::uint64_t>(cfg.n_samples);
        rows.push_back(std::move(r));
    } else if (cfg.subcommand == "bounds") {
        LyapunovEstimate est = estimate_time_average(cfg.run, g);
        rng::Key key{cfg.run.seed, rng::substream(2, 0x5a11d)};
        BoundsReport rep = sandwich_bounds(cfg.run.noise, g, cfg.run.kappa, cfg.run.tau,
                                           cfg.n_samples, est.lambda_hat, est.stderr_, key,
                                           cfg.run.threads);
        ResultRow r = base_row(cfg);
        fill_estimate(r, est);
        r.zeta_mean = rep.zeta_mean;
        r.mu_mean = rep.mu_mean;
        r.target = rep.lower;
        rows.push_back(std::move(r));
        std::fprintf(stderr, "[slowenv] bounds: upper_ok=%d lower_ok=%d\n", rep.upper_ok,
                     rep.lower_ok);
    } else if (cfg.subcommand == "sync") {
        RenewalPotential pot(cfg.run.noise, g, cfg.run.tau, rng::Key{cfg.run.seed, 0});
        SyncReport rep = synchronization_rate(uniform_density(g), cosine_bump_density(g), pot,
                                              cfg.run.n_periods, cfg.run.scheme_config());
        ResultRow r = base_row(cfg);
        r.slope = rep.fitted_slope;
        r.stderr_ = rep.slope_stderr;
        r.n_periods = cfg.run.n_periods;
        rows.push_back(std::move(r));
    } else if (cfg.subcommand == "birkhoff") {
        PotentialSample xi = sample_potential(cfg.run.noise, g, rng::Key{cfg.run.seed, 1}, 0);
        BirkhoffEstimate est = birkhoff_coefficient_estimate(
            xi, cfg.run.tau, cfg.run.scheme_config(), cfg.n_pairs, rng::Key{cfg.run.seed, 2});
        ResultRow r = base_row(cfg);
        r.mu_hat_birkhoff = est.mu_hat;
        rows.push_back(std::move(r));
    } else if (cfg.subcommand == "chaos-const") {
        ChaosEval e;
        try {
            e = zeroth_chaos_constant(cfg.run.tau, cfg.run.kappa, cfg.chaos_cutoff,
                                      cfg.chaos_convention);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(5, err.what());
        }
        ResultRow r = base_row(cfg);
        r.extrapolated = e.value;
        r.target = zeroth_chaos_limit(cfg.run.kappa, cfg.chaos_convention);
        rows.push_back(std::move(r));
    } else if (cfg.subcommand == "validate") {
        // scheme cross-checks on the cosine potential
        PotentialSample xi = cosine_probe(g);
        ProjectiveDensity one = uniform_density(g);
        SchemeConfig eig{Scheme::EigenExact, cfg.run.dt_max, cfg.run.kappa};
        SchemeConfig st{Scheme::StrangSplit, cfg.run.dt_max, cfg.run.kappa};
        SchemeConfig st2{Scheme::StrangSplit, cfg.run.dt_max / 2.0, cfg.run.kappa};
        double ref = propagate_period(one, xi, cfg.run.tau, eig).log_mass;
        double lm1 = propagate_period(one, xi, cfg.run.tau, st).log_mass;
        double lm2 = propagate_period(one, xi, cfg.run.tau, st2).log_mass;
        FeynmanKacResult fk = feynman_kac_mass(xi, cfg.run.tau, one, cfg.n_paths, 5e-4,
                                               cfg.run.kappa, rng::Key{cfg.run.seed, 3});
        ResultRow r = base_row(cfg);
        r.target = ref;
        r.extrapolated = lm1;
        r.lambda_hat = std::abs(lm1 - ref);
        r.slope = std::abs(lm1 - ref) / std::abs(lm2 - ref);  // dt-halving factor
        r.mu_mean = (fk.estimate - std::exp(ref)) / std::max(fk.stderr_, 1e-300);  // FK z-score
        rows.push_back(std::move(r));
        std::fprintf(stderr, "[slowenv] validate: |strang-eigen|=%.3g halving=%.2f fk_z=%.2f\n",
                     std::abs(lm1 - ref), *rows.back().slope, *rows.back().mu_mean);
    } else {
        throw ConfigError(5, "unhandled subcommand " + cfg.subcommand);
    }
    return rows;
}

}  // namespace

int run(const CliConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<ResultRow> rows;
    int exit_code = 0;
    try {
        rows = dispatch(cfg);
    } catch (const NumericalBreakdown& e) {
        std::fprintf(stderr, "[slowenv] numerical breakdown: %s\n", e.what());
        ResultRow r = base_row(cfg);
        r.lambda_hat = std::nan("");
        rows.push_back(std::move(r));
        exit_code = 1;
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cfg.emit_timings)
        for (auto& r : rows) r.wall_time_s = elapsed;

    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) throw ConfigError(2, "cannot open output path: " + cfg.output_path);
    if (cfg.output_format == OutputFormat::Csv) {
        out << kResultHeader << '\n';
        for (const auto& r : rows) out << format_row_csv(r) << '\n';
    } else {
        for (const auto& r : rows) out << format_row_json(r) << '\n';
    }
    out.close();
    std::fprintf(stderr, "[slowenv] %s: wrote %zu row(s) to %s in %.2fs\n", cfg.subcommand.c_str(),
                 rows.size(), cfg.output_path.c_str(), elapsed);
    return exit_code;
}

}  // namespace slowenv
