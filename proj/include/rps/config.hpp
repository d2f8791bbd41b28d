#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rps {

enum class ModelKind { Unconstrained, Constrained, Heat, Nonlocal, MonteCarlo };

std::string to_string(ModelKind m);
ModelKind model_from_string(const std::string& s);

/// Named initial-condition shapes: indicator(a,b), gaussian(mean,sigma), or
/// an external csv:PATH (x,f rows matching the grid; wealth list for MC runs).
struct InitSpec {
    enum class Kind { Indicator, Gaussian, Csv };
    Kind kind = Kind::Indicator;
    double a = 0.0; // indicator lower / gaussian mean
    double b = 1.0; // indicator upper / gaussian sigma
    std::string path;
    std::string text() const;
};

/// Parsed experiment configuration. Flat `key = value` text, one per line,
/// '#' comments. Unknown keys are rejected with a line diagnostic; which keys
/// are required depends on the command (run / sweep / mc-compare).
struct RunConfig {
    std::map<std::string, std::string> raw; // resolved echo, written to manifests

    ModelKind model = ModelKind::Unconstrained;
    double eta = 1.0;
    std::optional<double> payoff; // key "h" (alias "eps")
    double x_min = 0.0;
    double x_max = 1.0;
    std::optional<int> n_cells;
    std::optional<double> dt;
    double t_end = 1.0;
    std::optional<std::vector<double>> output_times;
    std::optional<int> output_count;
    InitSpec init;
    uint64_t seed = 1;
    std::optional<long long> agents;
    bool mc_constrained = false;

    std::optional<std::vector<double>> sweep_eps;
    int sweep_alignment = 8;

    /// Sample times for a run: explicit output.times, or output.count uniform
    /// samples of [0, t_end] (default 11).
    std::vector<double> resolved_output_times() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

} // namespace rps
