#pragma once

// Batch front-end: model configuration, task dispatch, JSON reports and
// CSV curves. Everything here is deterministic given (config, seed); the
// only nondeterministic report field is "timing".

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "esov/params.hpp"

namespace esov::cli {

using json = nlohmann::json;

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kConfigError = 2 };

struct Tolerances {
    double trunc_tol = 1e-16;
    double residual_tol = 1e-9;
    double rho = 1e-6;
    double gap_tol = 1e-7;
};

struct ModelConfig {
    cplx tau;
    cplx eta;
    std::vector<Site> sites;
    std::uint64_t seed = 1;
    Tolerances tol;
    json theta = json::object();
    json gaudin = json::object();
    json eqg = json::object();
    json irf = json::object();

    // Builds the evaluator; throws ConfigError on lattice or model invariants.
    ModelParams params() const;
    // Effective configuration, overrides applied.
    json to_json() const;
};

// Throws ConfigError naming the offending field.
ModelConfig parse_config(const json& j);
ModelConfig load_config(const std::string& path);

cplx parse_complex(const json& j, const std::string& where);
json complex_json(cplx z);

struct Check {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool at_least = false; // residual >= tolerance instead of <=
    bool pass() const;
};

struct CsvTable {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct TaskOutput {
    std::vector<Check> checks;
    json results = json::object();
    std::vector<CsvTable> csv;
    bool pass() const;
};

const std::vector<std::string>& subcommands();

// Runs one subcommand ("irf spectrum", ...) on a parsed config.
TaskOutput run_task(const std::string& command, const ModelConfig& cfg);

json make_report(const std::string& command, const ModelConfig& cfg, const TaskOutput& out, double seconds);

struct RunOptions {
    std::string config_path;
    std::string out_path;  // empty: stdout
    std::string csv_dir;   // empty: no CSV
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
};

// Load, run, write. Returns the exit code; diagnostics go to err.
int run(const std::string& command, const RunOptions& opt, std::ostream& out, std::ostream& err);

} // namespace esov::cli
