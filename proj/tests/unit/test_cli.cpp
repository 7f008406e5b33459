#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "slowenv/cli.hpp"

using namespace slowenv;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int config_error_code(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.exit_code;
    }
    return 0;
}
}  // namespace

TEST_CASE("config: minimal document gets documented defaults") {
    CliConfig cfg = parse_config_text(
        R"({"subcommand":"lyapunov","noise":{"kind":"piecewise","m":4,"law":"rademacher","sigma":1.0},"tau":0.5,"seed":7})");
    CHECK(cfg.run.grid_n == 256);
    CHECK(cfg.run.kappa == 1.0);
    CHECK(cfg.run.scheme == Scheme::StrangSplit);
    CHECK(cfg.run.dt_max == 1e-3);
    CHECK(cfg.run.batch_count == 20);
    CHECK(cfg.run.burn_in_auto);
    CHECK(cfg.run.tau == 0.5);
    CHECK(cfg.run.seed == 7);
    CHECK(cfg.output_format == OutputFormat::Csv);
}

TEST_CASE("config: error taxonomy maps to distinct exit codes") {
    CHECK_THROWS_AS(parse_config("/nonexistent/path.json"), ConfigError);
    try {
        parse_config("/nonexistent/path.json");
    } catch (const ConfigError& e) {
        CHECK(e.exit_code == 2);
    }

    CHECK(config_error_code("{not json") == 3);
    CHECK(config_error_code(R"({"subcommand":"lyapunov"})") == 3);  // missing noise
    // unknown keys are rejected, including near-misses of known ones
    CHECK(config_error_code(
              R"({"subcommand":"lyapunov","noise":{"kind":"zero"},"kapa":1})") == 4);
    CHECK(config_error_code(
              R"({"subcommand":"lyapunov","noise":{"kind":"zero","bogus":1}})") == 4);
    // out of range
    CHECK(config_error_code(
              R"({"subcommand":"lyapunov","noise":{"kind":"zero"},"grid_n":1})") == 5);
    CHECK(config_error_code(
              R"({"subcommand":"lyapunov","noise":{"kind":"zero"},"tau":-2})") == 5);
    CHECK(config_error_code(
              R"({"subcommand":"wat","noise":{"kind":"zero"}})") == 5);
}

TEST_CASE("config: overrides and seed precedence") {
    CliOverrides ov;
    ov.tau = 2.5;
    ov.grid_n = 32;
    ov.scheme = std::string("eigen");
    CliConfig cfg = parse_config_text(
        R"({"subcommand":"lyapunov","noise":{"kind":"zero"},"tau":0.5,"seed":7})", ov);
    CHECK(cfg.run.tau == 2.5);
    CHECK(cfg.run.grid_n == 32);
    CHECK(cfg.run.scheme == Scheme::EigenExact);
    CHECK(cfg.run.seed == 7);

    setenv("SLOWENV_SEED", "99", 1);
    CliConfig c2 = parse_config_text(R"({"subcommand":"lyapunov","noise":{"kind":"zero"}})");
    CHECK(c2.run.seed == 99);
    // config beats the environment
    CliConfig c3 =
        parse_config_text(R"({"subcommand":"lyapunov","noise":{"kind":"zero"},"seed":5})");
    CHECK(c3.run.seed == 5);
    unsetenv("SLOWENV_SEED");
}

TEST_CASE("result rows: csv round-trip") {
    ResultRow r;
    r.run_id = "00ff00ff00ff00ff";
    r.subcommand = "lyapunov";
    r.noise_kind = "piecewise";
    r.noise_params = "m=4;law=rademacher;sigma=1";
    r.kappa = 1.0;
    r.tau = 0.4999999999999999;
    r.n_grid = 256;
    r.scheme = "strang";
    r.dt_max = 1e-3;
    r.n_periods = 12345;
    r.burn_in = 17;
    r.seed = 7;
    r.lambda_hat = 0.1234567890123456789;
    r.stderr_ = 3.5e-5;
    r.clamp_events = 2;

    ResultRow back = parse_row_csv(format_row_csv(r));
    CHECK(back.run_id == r.run_id);
    CHECK(back.noise_params == r.noise_params);
    CHECK(*back.tau == *r.tau);            // 17 significant digits round-trip doubles
    CHECK(*back.lambda_hat == *r.lambda_hat);
    CHECK(*back.stderr_ == *r.stderr_);
    CHECK(!back.target.has_value());
    CHECK(!back.mu_hat_birkhoff.has_value());
    CHECK(*back.n_periods == 12345);

    // header shape matches the row shape
    std::string header(kResultHeader);
    CHECK(std::count(header.begin(), header.end(), ',') == 21);
}

TEST_CASE("run: zero-noise lyapunov writes one zero row; reruns are bytewise identical") {
    CliConfig cfg = parse_config_text(
        R"({"subcommand":"lyapunov","noise":{"kind":"zero"},"tau":0.5,"seed":3,"grid_n":64,
            "n_periods":100,"batch_count":10,"output_path":"/tmp/slowenv_t1.csv"})");
    CHECK(run(cfg) == 0);
    std::string first = slurp("/tmp/slowenv_t1.csv");

    ResultRow row = parse_row_csv(first.substr(first.find('\n') + 1,
                                               first.find('\n', first.find('\n') + 1) -
                                                   first.find('\n') - 1));
    CHECK(std::abs(*row.lambda_hat) < 1e-10);
    CHECK(row.wall_time_s == 0.0);

    CHECK(run(cfg) == 0);
    CHECK(slurp("/tmp/slowenv_t1.csv") == first);

    // worker count must not change a single byte
    cfg.run.threads = 2;
    cfg.run.replicas = 2;
    cfg.output_path = "/tmp/slowenv_t2.csv";
    CHECK(run(cfg) == 0);
    std::string two = slurp("/tmp/slowenv_t2.csv");
    cfg.run.threads = 1;
    cfg.output_path = "/tmp/slowenv_t3.csv";
    CHECK(run(cfg) == 0);
    CHECK(slurp("/tmp/slowenv_t3.csv") == two);
    std::remove("/tmp/slowenv_t1.csv");
    std::remove("/tmp/slowenv_t2.csv");
    std::remove("/tmp/slowenv_t3.csv");
}

TEST_CASE("run: validate subcommand reports scheme deltas") {
    CliConfig cfg = parse_config_text(
        R"({"subcommand":"validate","noise":{"kind":"zero"},"tau":0.1,"seed":1,"grid_n":256,
            "n_paths":20000,"output_path":"/tmp/slowenv_val.csv"})");
    CHECK(run(cfg) == 0);
    std::string text = slurp("/tmp/slowenv_val.csv");
    std::string line = text.substr(text.find('\n') + 1);
    line = line.substr(0, line.find('\n'));
    ResultRow row = parse_row_csv(line);
    CHECK(*row.lambda_hat <= 1e-6);             // |strang - eigen|
    CHECK(std::abs(*row.mu_mean) <= 3.0);       // Feynman-Kac z-score
    std::remove("/tmp/slowenv_val.csv");
}

TEST_CASE("run: config file is never mutated") {
    const char* path = "/tmp/slowenv_cfg_ro.json";
    {
        std::ofstream out(path);
        out << R"({"subcommand":"lyapunov","noise":{"kind":"zero"},"tau":0.5,"seed":3,
                   "grid_n":32,"n_periods":100,"batch_count":10,
                   "output_path":"/tmp/slowenv_ro_out.csv"})";
    }
    std::string before = slurp(path);
    CliConfig cfg = parse_config(path);
    CHECK(run(cfg) == 0);
    CHECK(slurp(path) == before);
    std::remove(path);
    std::remove("/tmp/slowenv_ro_out.csv");
}

TEST_CASE("run: sweep isolates failed taus") {
    CliConfig cfg = parse_config_text(
        R"({"subcommand":"sweep","noise":{"kind":"zero"},"taus":[0.25,0.5],"seed":2,"grid_n":32,
            "n_periods":100,"batch_count":10,"output_path":"/tmp/slowenv_sweep.csv"})");
    CHECK(run(cfg) == 0);
    std::string text = slurp("/tmp/slowenv_sweep.csv");
    int lines = static_cast<int>(std::count(text.begin(), text.end(), '\n'));
    CHECK(lines == 3);  // header + 2 rows
    std::remove("/tmp/slowenv_sweep.csv");
}

TEST_CASE("run: json-lines output") {
    CliConfig cfg = parse_config_text(
        R"({"subcommand":"chaos-const","noise":{"kind":"white"},"tau":1e-6,"kappa":1.0,
            "chaos_cutoff":100000,"chaos_convention":"bare-k2","output_format":"json",
            "output_path":"/tmp/slowenv_chaos.jsonl"})");
    CHECK(run(cfg) == 0);
    std::string text = slurp("/tmp/slowenv_chaos.jsonl");
    CHECK(text.find("\"extrapolated\"") != std::string::npos);
    CHECK(text.find("3.5") != std::string::npos);  // ~2 sqrt(pi)
    std::remove("/tmp/slowenv_chaos.jsonl");
}
