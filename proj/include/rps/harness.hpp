#pragma once

#include "rps/config.hpp"
#include "rps/grid.hpp"
#include "rps/limit_models.hpp"
#include "rps/unconstrained.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rps {

struct InvariantResult {
    std::string name;
    bool pass = true;
    double observed = 0.0;
    double threshold = 0.0;
};

/// Everything a finished run leaves behind, next to the files on disk
/// (trajectory.csv, moments.csv, manifest.json, optional SVG plots).
struct RunArtifacts {
    ModelKind model = ModelKind::Unconstrained;
    ModelParams params;
    std::filesystem::path out_dir;
    Trajectory trajectory;
    std::vector<double> beta_series;          // constrained models
    std::vector<double> mass_below_h_series;  // constrained models
    std::vector<double> tau_series;           // nonlocal model
    std::vector<InvariantResult> invariants;
    bool invariants_pass() const;
};

/// Runs one configuration, writes trajectory/moment CSVs (17 significant
/// digits) and a manifest with every parameter needed to re-run, and executes
/// the model's invariant suite, recording pass/fail per invariant.
RunArtifacts run_single(const RunConfig& cfg, const std::filesystem::path& out_dir,
                        bool plots = false);

struct ConvergenceReport {
    std::vector<double> eps_list;
    std::vector<double> errors;               // l1 distance to the limit at t_end
    double fitted_order = 0.0;
    double fit_residual = 0.0;
    bool monotone = true;
    std::vector<double> f_minus_mass;         // constrained sweeps
    std::vector<double> limit_lost_mass;      // rho - M(t_end) from the limit oracle
};

/// Runs the rescaled model for each eps in sweep.eps_list (grid refined as
/// dx = eps / sweep.alignment), measures the l1 error against the matching
/// limit solution and fits the convergence order by log-log least squares.
/// Individual runs land in out_dir/eps_*/; entries execute in a worker pool.
ConvergenceReport epsilon_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                int jobs = 1);

struct McCompareReport {
    std::vector<double> times;
    std::vector<double> distances;
    std::vector<double> tolerances; // 5 sqrt(n_cells dx / N)
    int exceed_count = 0;
};

/// Runs the particle simulator and the matching kinetic solver on the same
/// configuration and emits per-output-time histogram distances with the
/// statistical tolerance.
McCompareReport mc_compare(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Re-checks the invariants of a completed run directory from its CSV output.
std::vector<InvariantResult> check_invariants(const std::filesystem::path& run_dir);

/// Initial condition realized on a grid. Nonlocal runs use node sampling
/// (staggered cell averages) so the Dirichlet node carries the boundary value.
DensityField build_initial_field(const Grid1D& grid, const InitSpec& init, FieldSampling sampling);

} // namespace rps
