#include "rps/config.hpp"
#include "rps/errors.hpp"
#include "rps/harness.hpp"
#include "rps/version.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitNumerical = 4;

void print_invariants(const std::vector<rps::InvariantResult>& inv) {
    for (const rps::InvariantResult& r : inv)
        std::printf("  [%s] %-28s observed %.3e  (threshold %.3e)\n",
                    r.pass ? "ok" : "FAIL", r.name.c_str(), r.observed, r.threshold);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kinetic rock-paper-scissors exchange models: solvers, limits and a game simulator"};
    app.set_version_flag("--version", rps::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    bool plots = false;
    int jobs = 1;
    std::optional<uint64_t> seed_override;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("--config", config_path, "configuration file (key = value lines)")
                ->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed_override, "override the configured RNG seed");
    };

    CLI::App* run = app.add_subcommand("run", "run one model configuration");
    add_common(run, true);
    run->add_flag("--plots", plots, "also write SVG snapshot plots");

    CLI::App* sweep = app.add_subcommand("sweep", "vanishing-wager sweep against the limit model");
    add_common(sweep, true);
    sweep->add_option("--jobs", jobs, "parallel sweep workers")->check(CLI::PositiveNumber);

    CLI::App* mc = app.add_subcommand("mc-compare", "particle simulator vs kinetic solver");
    add_common(mc, true);

    CLI::App* check = app.add_subcommand("check-invariants", "re-check a finished run directory");
    check->add_option("--out", out_dir, "run directory to check")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            rps::RunConfig cfg = rps::parse_config_file(config_path);
            if (seed_override) cfg.seed = *seed_override;
            const rps::RunArtifacts art = rps::run_single(cfg, out_dir, plots);
            std::printf("run: model=%s cells=%d samples=%zu -> %s\n",
                        rps::to_string(art.model).c_str(), art.trajectory.front().grid.n_cells,
                        art.trajectory.size(), out_dir.c_str());
            print_invariants(art.invariants);
            if (!art.invariants_pass()) {
                std::fprintf(stderr, "invariant violation detected\n");
                return kExitInvariant;
            }
        } else if (sweep->parsed()) {
            rps::RunConfig cfg = rps::parse_config_file(config_path);
            if (seed_override) cfg.seed = *seed_override;
            const rps::ConvergenceReport rep = rps::epsilon_sweep(cfg, out_dir, jobs);
            std::printf("sweep: fitted order p = %.3f (residual %.2e)%s\n", rep.fitted_order,
                        rep.fit_residual, rep.monotone ? "" : "  [non-monotone errors]");
            for (size_t i = 0; i < rep.eps_list.size(); ++i)
                std::printf("  eps = %-8g error = %.6e\n", rep.eps_list[i], rep.errors[i]);
            if (!rep.monotone)
                std::fprintf(stderr, "warning: error sequence is not monotone\n");
        } else if (mc->parsed()) {
            rps::RunConfig cfg = rps::parse_config_file(config_path);
            if (seed_override) cfg.seed = *seed_override;
            const rps::McCompareReport rep = rps::mc_compare(cfg, out_dir);
            for (size_t i = 0; i < rep.times.size(); ++i)
                std::printf("  t = %-8g l1 = %.4e  tol = %.4e%s\n", rep.times[i],
                            rep.distances[i], rep.tolerances[i],
                            rep.distances[i] > rep.tolerances[i] ? "  EXCEEDED" : "");
            if (rep.exceed_count > 0)
                std::fprintf(stderr, "warning: %d sample(s) above the statistical tolerance\n",
                             rep.exceed_count);
        } else if (check->parsed()) {
            const auto inv = rps::check_invariants(out_dir);
            print_invariants(inv);
            for (const rps::InvariantResult& r : inv)
                if (!r.pass) return kExitInvariant;
        }
    } catch (const rps::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const rps::InvariantViolation& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return kExitInvariant;
    } catch (const rps::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
