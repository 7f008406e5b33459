#include "slowenv/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace slowenv {

using nlohmann::json;

namespace {

[[noreturn]] void fail_malformed(const std::string& what) { throw ConfigError(3, what); }
[[noreturn]] void fail_unknown(const std::string& key) {
    throw ConfigError(4, "unknown config key: " + key);
}
[[noreturn]] void fail_range(const std::string& what) {
    throw ConfigError(5, "out-of-range value: " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) fail_unknown(where + it.key());
}

double get_num(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail_malformed(std::string(key) + " must be a number");
    return obj[key].get<double>();
}

NoiseSpec parse_noise(const json& j) {
    if (!j.is_object()) fail_malformed("noise must be an object");
    check_keys(j, {"kind", "m", "law", "sigma", "alpha", "K", "multipliers"}, "noise.");
    if (!j.contains("kind") || !j["kind"].is_string()) fail_malformed("noise.kind required");
    std::string kind = j["kind"].get<std::string>();

    auto law_of = [&](const std::string& s) {
        if (s == "rademacher") return ScalarLaw::Rademacher;
        if (s == "uniform") return ScalarLaw::UniformSym;
        if (s == "gaussian") return ScalarLaw::CenteredGaussian;
        fail_range("noise.law=" + s);
    };

    NoiseSpec spec;
    try {
        if (kind == "piecewise") {
            int m = static_cast<int>(get_num(j, "m", 4));
            ScalarLaw law = law_of(j.contains("law") ? j["law"].get<std::string>() : "rademacher");
            spec = NoiseSpec::piecewise(m, law, get_num(j, "sigma", 1.0));
        } else if (kind == "holder_fourier") {
            spec = NoiseSpec::holder_fourier(
                get_num(j, "alpha", 0.5), static_cast<int>(get_num(j, "K", 1)),
                !j.contains("multipliers") || j["multipliers"].get<std::string>() == "gaussian");
        } else if (kind == "white") {
            spec = NoiseSpec::white();
        } else if (kind == "constant") {
            ScalarLaw law = law_of(j.contains("law") ? j["law"].get<std::string>() : "rademacher");
            spec = NoiseSpec::constant(law, get_num(j, "sigma", 1.0));
        } else if (kind == "zero") {
            spec = NoiseSpec::zero();
        } else {
            fail_range("noise.kind=" + kind);
        }
    } catch (const std::invalid_argument& e) {
        fail_range(e.what());
    }
    return spec;
}

const std::set<std::string> kTopKeys = {
    "version",     "subcommand",  "noise",        "kappa",         "tau",
    "taus",        "grid_n",      "n",            "n_periods",     "replicas",
    "burn_in",     "burn_in_cap", "scheme",       "dt_max",        "seed",
    "batch_count", "threads",     "n_samples",    "n_outer",       "n_pairs",
    "n_paths",     "chaos_cutoff", "chaos_convention", "output_path", "output_format",
    "emit_timings", "log_level"};

const std::set<std::string> kSubcommands = {
    "lyapunov", "furstenberg", "sweep",    "smalltau", "sqrtlaw", "spectrum",
    "bounds",   "sync",        "birkhoff", "chaos-const", "validate"};

}  // namespace

CliConfig parse_config_text(const std::string& text, const CliOverrides& overrides) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail_malformed(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail_malformed("config root must be an object");
    check_keys(j, kTopKeys, "");

    CliConfig cfg;
    cfg.version = static_cast<int>(get_num(j, "version", 1));
    if (cfg.version != 1) fail_range("version must be 1");

    if (!j.contains("subcommand") || !j["subcommand"].is_string())
        fail_malformed("subcommand required");
    cfg.subcommand = j["subcommand"].get<std::string>();
    if (!kSubcommands.count(cfg.subcommand)) fail_range("subcommand=" + cfg.subcommand);

    if (j.contains("noise")) cfg.run.noise = parse_noise(j["noise"]);
    else if (cfg.subcommand == "sqrtlaw") cfg.run.noise = NoiseSpec::white();
    else fail_malformed("noise required");

    cfg.run.kappa = get_num(j, "kappa", 1.0);
    if (!(cfg.run.kappa > 0.0)) fail_range("kappa must be positive");

    cfg.run.tau = get_num(j, "tau", 1.0);
    if (overrides.tau) cfg.run.tau = *overrides.tau;
    if (!(cfg.run.tau > 0.0) && cfg.subcommand != "sweep" && cfg.subcommand != "smalltau" &&
        cfg.subcommand != "sqrtlaw")
        fail_range("tau must be positive");

    if (j.contains("taus")) {
        if (!j["taus"].is_array()) fail_malformed("taus must be an array");
        for (const auto& t : j["taus"]) {
            if (!t.is_number()) fail_malformed("taus entries must be numbers");
            cfg.taus.push_back(t.get<double>());
            if (!(cfg.taus.back() > 0.0)) fail_range("taus entries must be positive");
        }
    }

    cfg.run.grid_n = static_cast<int>(get_num(j, "grid_n", get_num(j, "n", 256)));
    if (overrides.grid_n) cfg.run.grid_n = *overrides.grid_n;
    if (cfg.run.grid_n < 2) fail_range("grid_n must be >= 2");

    cfg.run.n_periods = static_cast<std::uint64_t>(get_num(j, "n_periods", 1000));
    cfg.run.replicas = static_cast<int>(get_num(j, "replicas", 1));
    if (cfg.run.replicas < 1) fail_range("replicas must be >= 1");

    if (j.contains("burn_in")) {
        if (j["burn_in"].is_string()) {
            if (j["burn_in"].get<std::string>() != "auto") fail_range("burn_in must be auto or a count");
            cfg.run.burn_in_auto = true;
        } else if (j["burn_in"].is_number()) {
            cfg.run.burn_in_auto = false;
            cfg.run.burn_in_fixed = static_cast<std::uint64_t>(j["burn_in"].get<double>());
        } else {
            fail_malformed("burn_in must be \"auto\" or a count");
        }
    }
    cfg.run.burn_in_cap = static_cast<std::uint64_t>(get_num(j, "burn_in_cap", 20000));

    if (j.contains("scheme")) {
        try {
            cfg.run.scheme = scheme_from_name(j["scheme"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            fail_range(e.what());
        }
    }
    if (overrides.scheme) {
        try {
            cfg.run.scheme = scheme_from_name(*overrides.scheme);
        } catch (const std::invalid_argument& e) {
            fail_range(e.what());
        }
    }

    cfg.run.dt_max = get_num(j, "dt_max", 1e-3);
    if (!(cfg.run.dt_max > 0.0)) fail_range("dt_max must be positive");
    cfg.run.batch_count = static_cast<int>(get_num(j, "batch_count", 20));
    if (cfg.run.batch_count < 2) fail_range("batch_count must be >= 2");
    cfg.run.threads = static_cast<int>(get_num(j, "threads", 1));
    if (overrides.threads) cfg.run.threads = *overrides.threads;
    if (cfg.run.threads < 1) fail_range("threads must be >= 1");

    if (j.contains("seed")) {
        if (!j["seed"].is_number()) fail_malformed("seed must be a number");
        cfg.run.seed = j["seed"].get<std::uint64_t>();
    } else if (const char* env = std::getenv("SLOWENV_SEED")) {
        cfg.run.seed = std::strtoull(env, nullptr, 10);
    }
    if (overrides.seed) cfg.run.seed = *overrides.seed;

    cfg.n_samples = static_cast<int>(get_num(j, "n_samples", 200));
    cfg.n_outer = static_cast<int>(get_num(j, "n_outer", 100));
    cfg.n_pairs = static_cast<int>(get_num(j, "n_pairs", 16));
    cfg.n_paths = static_cast<std::uint64_t>(get_num(j, "n_paths", 100000));
    cfg.chaos_cutoff = static_cast<long long>(get_num(j, "chaos_cutoff", 100000));
    if (j.contains("chaos_convention")) {
        try {
            cfg.chaos_convention = chaos_convention_from_name(j["chaos_convention"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            fail_range(e.what());
        }
    }

    if (j.contains("output_path")) cfg.output_path = j["output_path"].get<std::string>();
    if (overrides.out) cfg.output_path = *overrides.out;
    if (j.contains("output_format")) {
        std::string f = j["output_format"].get<std::string>();
        if (f == "csv") cfg.output_format = OutputFormat::Csv;
        else if (f == "json") cfg.output_format = OutputFormat::JsonLines;
        else fail_range("output_format=" + f);
    }
    if (j.contains("emit_timings")) {
        if (!j["emit_timings"].is_boolean()) fail_malformed("emit_timings must be boolean");
        cfg.emit_timings = j["emit_timings"].get<bool>();
    }
    if (j.contains("log_level")) cfg.log_level = j["log_level"].get<std::string>();
    return cfg;
}

CliConfig parse_config(const std::string& path, const CliOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError(2, "config file not found: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

std::string run_id_for(const CliConfig& cfg) {
    // canonical digest of everything that determines the output
    std::ostringstream os;
    os << cfg.version << '|' << cfg.subcommand << '|' << cfg.run.noise.kind_name() << '|'
       << cfg.run.noise.params_string() << '|' << cfg.run.kappa << '|' << cfg.run.tau << '|'
       << cfg.run.grid_n << '|' << cfg.run.n_periods << '|' << cfg.run.replicas << '|'
       << cfg.run.burn_in_auto << '|' << cfg.run.burn_in_fixed << '|'
       << scheme_name(cfg.run.scheme) << '|' << cfg.run.dt_max << '|' << cfg.run.seed << '|'
       << cfg.run.batch_count << '|' << cfg.n_samples << '|' << cfg.n_outer << '|' << cfg.n_pairs
       << '|' << cfg.n_paths << '|' << cfg.chaos_cutoff;
    for (double t : cfg.taus) os << '|' << t;
    std::string s = os.str();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace slowenv
