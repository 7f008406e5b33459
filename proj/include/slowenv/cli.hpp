#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slowenv/asymptotics.hpp"
#include "slowenv/lyapunov.hpp"

// Command-line driver: JSON run configuration (single document, optional
// "version" field, unknown keys rejected), deterministic seeding, and CSV /
// JSON-lines result emission with a fixed versioned schema.
//
// Exit codes: 0 success, 1 numerical breakdown (diagnostics row still
// written), 2 missing file, 3 malformed config, 4 unknown key, 5 out-of-range
// value. The environment variable SLOWENV_SEED supplies the seed when the
// config has none (config wins).

namespace slowenv {

struct ConfigError : std::runtime_error {
    int exit_code;
    ConfigError(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
};

enum class OutputFormat { Csv, JsonLines };

struct CliConfig {
    int version = 1;
    std::string subcommand;
    RunConfig run;                      // noise, kappa, tau, grid, periods, scheme, seed, ...
    std::vector<double> taus;           // sweep / smalltau / sqrtlaw
    int n_samples = 200;                // spectrum / bounds / large-tau
    int n_outer = 100;                  // furstenberg
    int n_pairs = 16;                   // birkhoff
    std::uint64_t n_paths = 100000;     // validate (Feynman-Kac leg)
    long long chaos_cutoff = 100000;    // chaos-const
    ChaosConvention chaos_convention = ChaosConvention::Torus2PiK2;
    std::string output_path = "results.csv";
    OutputFormat output_format = OutputFormat::Csv;
    bool emit_timings = false;          // wall_time_s stays 0 unless set (determinism)
    std::string log_level = "info";
};

// Scalar overrides applied after the file is parsed (CLI flags).
struct CliOverrides {
    std::optional<double> tau;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid_n;
    std::optional<std::string> scheme;
    std::optional<std::string> out;
    std::optional<int> threads;
};

CliConfig parse_config(const std::string& path, const CliOverrides& overrides = {});
CliConfig parse_config_text(const std::string& json_text, const CliOverrides& overrides = {});

// One flat output record. Header fixed and versioned; numbers serialized with
// 17 significant digits; fields that do not apply stay empty.
struct ResultRow {
    std::string run_id;
    std::string subcommand;
    std::string noise_kind;
    std::string noise_params;
    double kappa = 0.0;
    std::optional<double> tau;
    int n_grid = 0;
    std::string scheme;
    double dt_max = 0.0;
    std::optional<std::uint64_t> n_periods;
    std::optional<std::uint64_t> burn_in;
    std::uint64_t seed = 0;
    std::optional<double> lambda_hat;
    std::optional<double> stderr_;
    std::optional<double> target;
    std::optional<double> extrapolated;
    std::optional<double> zeta_mean;
    std::optional<double> mu_mean;
    std::optional<double> slope;
    std::optional<double> mu_hat_birkhoff;
    std::uint64_t clamp_events = 0;
    double wall_time_s = 0.0;
};

extern const char* const kResultHeader;  // versioned CSV header line

std::string format_row_csv(const ResultRow& row);
std::string format_row_json(const ResultRow& row);

// Parses one CSV data line back into a row (round-trip checks).
ResultRow parse_row_csv(const std::string& line);

// Executes the configured subcommand, writes rows to cfg.output_path.
// Returns the process exit code (0, or 1 after a numerical breakdown).
int run(const CliConfig& cfg);

// Deterministic identifier: hash of the canonicalized configuration.
std::string run_id_for(const CliConfig& cfg);

}  // namespace slowenv
