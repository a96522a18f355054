#pragma once

// Experiment driver behind the `ssips` command: INI configuration,
// validation, and the subcommand pipelines that write CSV/JSON artifacts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssips/analysis.hpp"

namespace ssips {

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    std::string key;  // "section.key", or empty for whole-config findings
    std::string message;
};

std::string to_string(const Diagnostic& d);

struct IfsConfig {
    std::string preset = "sg";
    /// Inline definition: each map is dim*dim linear entries (row-major) then dim translation entries.
    int dim = 0;
    std::vector<std::vector<double>> maps;
    bool open_set_condition = true;
};

struct ModelConfig {
    std::string name = "kuramoto";
    double coupling = 1.0;
    double gamma = 1.0;
    std::string rule = "linear";
    double radius = 0.5;

    std::string kernel = "exp_distance";
    double kernel_value = 1.0;
    double kernel_scale = 1.0;

    double omega_amplitude = 1.0;
    double omega_frequency = 1.0;
    int omega_terms = 8;

    std::string initial = "fourier";
    double initial_value = 0.5;
    double initial_amplitude = 0.5;
    double initial_frequency = 1.0;
};

struct ExperimentConfig {
    IfsConfig ifs;
    std::vector<double> weights;  // empty: natural weights
    ModelConfig model;

    std::vector<int> levels{2, 3, 4, 5};
    int coarse_level = 2;
    std::vector<int> ell_levels{2, 3, 4};
    double T = 1.0;
    double dt = 1e-3;
    int output_stride = 10;
    std::vector<std::uint64_t> seeds{1};
    std::string graph = "deterministic";  // deterministic | bernoulli | both
    bool symmetric = true;
    int kernel_sublevel = 2;
    int data_sublevel = 2;
    std::string function = "exp_abs_diff";

    QuadratureConfig quadrature;
    int quadrature_sublevel = 4;

    double p = 2.0;
    int extra_ell = 1;
    int modulus_sublevel = 3;
    int projection_sublevel = 4;

    std::filesystem::path output_dir = "ssips-out";
    int threads = 1;
};

struct ConfigParse {
    ExperimentConfig config;
    std::vector<Diagnostic> diagnostics;  // parse-level findings
};

ConfigParse parse_config(std::string_view text);
/// Throws IoFailure when the file cannot be read.
ConfigParse load_config(const std::filesystem::path& path);

const std::vector<std::string>& subcommands();

/// Semantic checks for running `command` with `config`.
std::vector<Diagnostic> validate(const ExperimentConfig& config, std::string_view command);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Canonical JSON text of every field that affects results (not output_dir or threads).
std::string canonical_config_json(const ExperimentConfig& config);
/// FNV-1a 64 of canonical_config_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::uint64_t fnv1a64(std::string_view bytes);

Ifs build_ifs(const IfsConfig& config);
SelfSimilarMeasure build_measure(const ExperimentConfig& config);

struct RunSummary {
    std::vector<std::filesystem::path> files;
    double wall_seconds = 0.0;
};

/// Runs one subcommand (everything except `validate`) and writes its
/// artifacts plus manifest.json into config.output_dir.
RunSummary run(std::string_view command, const ExperimentConfig& config);

/// Exit status for an exception escaping run: 2 invalid config, 3 budget,
/// 4 numerical abort, 5 I/O, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace ssips
