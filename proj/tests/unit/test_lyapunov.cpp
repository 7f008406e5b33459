#include "doctest.h"

#include <cmath>

#include "slowenv/lyapunov.hpp"
#include "slowenv/projective.hpp"

using namespace slowenv;

namespace {
RunConfig quick_cfg(const NoiseSpec& spec, double tau, std::uint64_t periods) {
    RunConfig cfg;
    cfg.noise = spec;
    cfg.tau = tau;
    cfg.grid_n = 64;
    cfg.n_periods = periods;
    cfg.batch_count = 10;
    cfg.seed = 42;
    return cfg;
}
}  // namespace

TEST_CASE("time average: zero noise gives exactly zero rate") {
    TorusGrid g = make_grid(64);
    RunConfig cfg = quick_cfg(NoiseSpec::zero(), 0.5, 100);
    LyapunovEstimate est = estimate_time_average(cfg, g);
    CHECK(std::abs(est.lambda_hat) < 1e-10);
    CHECK(est.stderr_ == 0.0);
    CHECK(est.n_periods_used == 100);
}

TEST_CASE("time average: centered constant noise is statistically zero") {
    TorusGrid g = make_grid(64);
    RunConfig cfg = quick_cfg(NoiseSpec::constant(ScalarLaw::Rademacher, 1.0), 1.0, 2000);
    cfg.replicas = 2;
    cfg.threads = 2;
    LyapunovEstimate est = estimate_time_average(cfg, g);
    CHECK(std::abs(est.lambda_hat) <= 3.0 * est.stderr_);
    CHECK(est.stderr_ > 0.0);
    CHECK(est.stderr_ < 0.05);
}

TEST_CASE("time average: telescoping identity (single replica)") {
    TorusGrid g = make_grid(64);
    RunConfig cfg = quick_cfg(NoiseSpec::piecewise(4, ScalarLaw::Rademacher, 1.0), 0.5, 500);
    cfg.dt_max = 5e-3;
    LyapunovEstimate est = estimate_time_average(cfg, g);
    double reconstructed = est.lambda_hat * est.tau * static_cast<double>(est.n_periods_used);
    CHECK(reconstructed == doctest::Approx(est.total_log_mass).epsilon(1e-10));
}

TEST_CASE("time average: strict positivity for piecewise noise") {
    // lambda(0.5) at kappa=1 is only ~8e-3 against increment sd ~0.5 tau, so
    // resolving 3 sigma takes ~1e5 periods
    TorusGrid g = make_grid(64);
    RunConfig cfg = quick_cfg(NoiseSpec::piecewise(4, ScalarLaw::Rademacher, 1.0), 0.5, 45000);
    cfg.dt_max = 5e-3;
    cfg.replicas = 2;
    cfg.threads = 2;
    LyapunovEstimate est = estimate_time_average(cfg, g);
    CHECK(est.lambda_hat - 3.0 * est.stderr_ > 0.0);
}

TEST_CASE("time average: initial-condition independence") {
    TorusGrid g = make_grid(64);
    RunConfig cfg = quick_cfg(NoiseSpec::piecewise(4, ScalarLaw::Rademacher, 1.0), 0.5, 1500);
    cfg.dt_max = 5e-3;
    LyapunovEstimate a = estimate_time_average(cfg, g);
    ProjectiveDensity bump = cosine_bump_density(g);
    LyapunovEstimate b = estimate_time_average(cfg, g, &bump);
    double comb = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
    CHECK(std::abs(a.lambda_hat - b.lambda_hat) <= 3.0 * comb);
}

TEST_CASE("time average: deterministic across worker counts") {
    TorusGrid g = make_grid(64);
    RunConfig cfg = quick_cfg(NoiseSpec::piecewise(4, ScalarLaw::UniformSym, 1.0), 0.25, 400);
    cfg.dt_max = 5e-3;
    cfg.replicas = 3;

    cfg.threads = 1;
    LyapunovEstimate a = estimate_time_average(cfg, g);
    cfg.threads = 2;
    LyapunovEstimate b = estimate_time_average(cfg, g);
    CHECK(a.lambda_hat == b.lambda_hat);
    CHECK(a.stderr_ == b.stderr_);
    CHECK(a.total_log_mass == b.total_log_mass);
}

TEST_CASE("furstenberg estimator: controls and cross-validation") {
    TorusGrid g = make_grid(64);

    RunConfig zero = quick_cfg(NoiseSpec::zero(), 0.5, 200);
    LyapunovEstimate fz = estimate_furstenberg(zero, g, 40);
    CHECK(std::abs(fz.lambda_hat) < 1e-10);

    RunConfig cst = quick_cfg(NoiseSpec::constant(ScalarLaw::Rademacher, 1.0), 0.5, 200);
    LyapunovEstimate fc = estimate_furstenberg(cst, g, 60);
    CHECK(std::abs(fc.lambda_hat) <= 3.0 * fc.stderr_);

    RunConfig pw = quick_cfg(NoiseSpec::piecewise(4, ScalarLaw::Rademacher, 1.0), 0.5, 3000);
    pw.dt_max = 5e-3;
    pw.threads = 2;
    LyapunovEstimate ta = estimate_time_average(pw, g);
    LyapunovEstimate fu = estimate_furstenberg(pw, g, 150);
    double comb = std::sqrt(ta.stderr_ * ta.stderr_ + fu.stderr_ * fu.stderr_);
    CHECK(std::abs(ta.lambda_hat - fu.lambda_hat) <= 3.0 * comb);

    CHECK_THROWS_AS(estimate_furstenberg(pw, g, 10), std::invalid_argument);
}

TEST_CASE("sweep: single tau, zero-noise row values, error isolation") {
    TorusGrid g = make_grid(64);
    RunConfig cfg = quick_cfg(NoiseSpec::zero(), 1.0, 100);

    auto rows = sweep_tau(cfg, g, {1.0});
    REQUIRE(rows.size() == 1);
    CHECK(!rows[0].failed);
    CHECK(std::abs(rows[0].estimate.lambda_hat) < 1e-10);

    auto rows3 = sweep_tau(cfg, g, {0.5, -1.0, 0.25});
    REQUIRE(rows3.size() == 3);
    CHECK(!rows3[0].failed);
    CHECK(rows3[1].failed);
    CHECK(!rows3[2].failed);
    CHECK(std::abs(rows3[2].estimate.lambda_hat) < 1e-10);
}

TEST_CASE("burn-in cap is a warning flag, not a failure") {
    TorusGrid g = make_grid(64);
    // zero noise at tiny tau synchronizes at rate 4 pi^2 tau per period, far
    // slower than a cap of 10 periods allows
    RunConfig cfg = quick_cfg(NoiseSpec::zero(), 1e-4, 100);
    cfg.burn_in_cap = 10;
    LyapunovEstimate est = estimate_time_average(cfg, g);
    CHECK(est.burn_in_capped);
    CHECK(est.burn_in_used == 10);
    CHECK(std::abs(est.lambda_hat) < 1e-10);
}

TEST_CASE("run config validation") {
    RunConfig cfg;
    cfg.noise = NoiseSpec::zero();
    cfg.n_periods = 100;
    cfg.batch_count = 20;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // 100 < 10*20
    cfg.batch_count = 10;
    CHECK_NOTHROW(cfg.validate());
    cfg.tau = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
