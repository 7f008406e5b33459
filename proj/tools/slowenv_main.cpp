#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "slowenv/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "slowenv: parabolic Anderson model in a slowly varying random environment on the "
        "1D torus. Runs the subcommand named in the JSON config and writes a result table."};

    std::string config_path;
    app.add_option("config", config_path, "JSON run configuration")->required();

    slowenv::CliOverrides ov;
    double tau = 0.0;
    std::uint64_t seed = 0;
    int grid_n = 0, threads = 0;
    std::string scheme, out;
    auto* tau_opt = app.add_option("--tau", tau, "override tau");
    auto* seed_opt = app.add_option("--seed", seed, "override seed");
    auto* grid_opt = app.add_option("--grid-n", grid_n, "override grid size");
    auto* scheme_opt = app.add_option("--scheme", scheme, "override scheme (strang|eigen|cn)");
    auto* out_opt = app.add_option("--out", out, "override output path");
    auto* thr_opt = app.add_option("--threads", threads, "override worker count");

    CLI11_PARSE(app, argc, argv);

    if (*tau_opt) ov.tau = tau;
    if (*seed_opt) ov.seed = seed;
    if (*grid_opt) ov.grid_n = grid_n;
    if (*scheme_opt) ov.scheme = scheme;
    if (*out_opt) ov.out = out;
    if (*thr_opt) ov.threads = threads;

    try {
        slowenv::CliConfig cfg = slowenv::parse_config(config_path, ov);
        return slowenv::run(cfg);
    } catch (const slowenv::ConfigError& e) {
        std::fprintf(stderr, "[slowenv] config error: %s\n", e.what());
        return e.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "[slowenv] error: %s\n", e.what());
        return 1;
    }
}
