// Experiment configuration: a flat, sectioned key-value file (TOML-style
// syntax: [section], key = value with numbers, strings, booleans and arrays),
// named presets, and full structural/semantic validation.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oqs/bath.hpp"
#include "oqs/generators.hpp"

namespace oqs::cli {

using ConfigValue = std::variant<std::string, double, bool, std::vector<double>,
                                 std::vector<std::string>>;

struct ConfigFile {
    // section -> key -> value; top-level keys live in section ""
    std::map<std::string, std::map<std::string, ConfigValue>> sections;

    bool has(const std::string& section, const std::string& key) const;
};

// Parses the file; throws std::runtime_error with a line diagnostic on
// malformed syntax, and on unreadable files.
ConfigFile parse_config(const std::string& path);

struct SystemConfig {
    Mat h;
    std::vector<Mat> couplings;
};

struct GeneratorConfig {
    double lambda = 0.1;
    int order = 2;
    Flavor flavor = Flavor::redfield;
    MarkovKind markov = MarkovKind::infinite_limit;
    double time = 0.0;
    std::vector<int> k4_terms{1};
};

struct GridConfig {
    double start = 0.0;
    double stop = 10.0;
    int points = 21;
    std::vector<double> explicit_times;  // overrides start/stop/points when set

    std::vector<double> times() const;
};

struct OracleConfig {
    int n_modes = 6;
    std::vector<double> frequencies;  // overrides n_modes placement when set
    double tau_max = 1.0;
    int grid = 21;
    double fit_tol = 0.05;
    double lambda_scale_probe = 0.0;  // physical time for the doubling probe; 0 = off
};

struct ExperimentConfig {
    std::string experiment;
    std::string preset;  // recorded for provenance; empty when fully explicit

    SystemConfig system;
    std::optional<SystemConfig> system2;  // second subsystem for joint runs
    BathModel bath;
    GeneratorConfig generator;
    double kappa = 0.0;
    std::vector<double> kappa_sweep;  // optional sweep for factorize
    GridConfig grid;
    Mat rho0;                      // initial / probe state
    std::string family = "mixture";  // pair-dynamics map family
};

const std::vector<std::string>& experiment_names();
const std::vector<std::string>& preset_names();

// Structural + semantic validation without running; empty result means the
// config is runnable for the given experiment.
std::vector<std::string> validate_config(const ConfigFile& file,
                                         const std::string& experiment);

// Builds the typed config; call validate_config first (throws
// std::runtime_error on the first violation otherwise).
ExperimentConfig load_experiment_config(const ConfigFile& file,
                                        const std::string& experiment);

// oracle-compare parameters, read from the [oracle] section
OracleConfig load_oracle_config(const ConfigFile& file);

}  // namespace oqs::cli
