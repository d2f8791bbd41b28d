#include "rps/config.hpp"
#include "rps/constrained.hpp"
#include "rps/errors.hpp"
#include "rps/game.hpp"
#include "rps/grid.hpp"
#include "rps/harness.hpp"
#include "rps/limit_models.hpp"
#include "rps/unconstrained.hpp"
#include "rps/version.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace rps;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kinetic rock-paper-scissors exchange models: grid layer, solvers, "
              "analytic oracles, vanishing-wager limits and the particle game simulator";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    // --- core types -----------------------------------------------------
    py::class_<Grid1D>(m, "Grid1D")
        .def_readonly("x_min", &Grid1D::x_min)
        .def_readonly("x_max", &Grid1D::x_max)
        .def_readonly("n_cells", &Grid1D::n_cells)
        .def_readonly("dx", &Grid1D::dx)
        .def("center", &Grid1D::center)
        .def("__repr__", [](const Grid1D& g) {
            return "Grid1D(" + std::to_string(g.x_min) + ", " + std::to_string(g.x_max) + ", " +
                   std::to_string(g.n_cells) + ")";
        });

    py::class_<DensityField>(m, "DensityField")
        .def_readonly("grid", &DensityField::grid)
        .def_readonly("values", &DensityField::values)
        .def_readonly("time", &DensityField::time);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double eta, double h, double rho, bool constrained) {
                 return ModelParams{eta, h, rho, constrained};
             }),
             py::arg("eta"), py::arg("h"), py::arg("rho"), py::arg("constrained") = false)
        .def_readwrite("eta", &ModelParams::eta)
        .def_readwrite("h", &ModelParams::h)
        .def_readwrite("rho", &ModelParams::rho)
        .def_readwrite("constrained", &ModelParams::constrained);

    py::class_<MomentReport>(m, "MomentReport")
        .def_readonly("mass", &MomentReport::mass)
        .def_readonly("first_moment", &MomentReport::first_moment)
        .def_readonly("energy", &MomentReport::energy)
        .def_readonly("linf", &MomentReport::linf)
        .def_readonly("time", &MomentReport::time);

    m.def("make_grid", &make_grid, py::arg("x_min"), py::arg("x_max"), py::arg("n_cells"));
    m.def("zero_field", &zero_field);
    m.def("field_from_values", &field_from_values, py::arg("grid"), py::arg("values"),
          py::arg("time") = 0.0);
    m.def("indicator_field", &indicator_field, py::arg("grid"), py::arg("a"), py::arg("b"),
          py::arg("amplitude") = 1.0);
    m.def("gaussian_field", &gaussian_field, py::arg("grid"), py::arg("mean"), py::arg("sigma"),
          py::arg("total_mass") = 1.0);
    m.def("mass", &mass);
    m.def("first_moment", &first_moment);
    m.def("energy", &energy);
    m.def("linf_norm", &linf_norm);
    m.def("l1_distance", &l1_distance);
    m.def("moment_report", &moment_report);

    // --- whole-line model -------------------------------------------------
    m.def("rhs_unconstrained", &rhs_unconstrained);
    m.def(
        "solve_unconstrained",
        [](const DensityField& f, const ModelParams& p, double t_end, double dt,
           const std::vector<double>& times) {
            return solve_unconstrained(f, p, t_end, dt, times);
        },
        py::arg("f_in"), py::arg("params"), py::arg("t_end"), py::arg("dt"),
        py::arg("output_times") = std::vector<double>{});

    py::class_<LatticeMeasure>(m, "LatticeMeasure")
        .def_readonly("spacing", &LatticeMeasure::spacing)
        .def_readonly("time", &LatticeMeasure::time)
        .def_readonly("weights", &LatticeMeasure::weights)
        .def("weight", &LatticeMeasure::weight)
        .def("j_max", &LatticeMeasure::j_max)
        .def("total", &LatticeMeasure::total);

    m.def("fundamental_solution", &fundamental_solution, py::arg("t"), py::arg("params"),
          py::arg("j_max"));
    m.def("fundamental_solution_series", &fundamental_solution_series, py::arg("t"),
          py::arg("params"), py::arg("j_max"));
    m.def("lattice_convolve", &lattice_convolve);

    py::class_<SpectralField>(m, "SpectralField")
        .def_readonly("frequencies", &SpectralField::frequencies)
        .def_readonly("amplitudes", &SpectralField::amplitudes)
        .def_readonly("time", &SpectralField::time);
    m.def("spectral_transform", &spectral_transform);
    m.def("spectral_solve", &spectral_solve, py::arg("f_in"), py::arg("t"), py::arg("params"));

    py::class_<EnergyDecayReport>(m, "EnergyDecayReport")
        .def_readonly("times", &EnergyDecayReport::times)
        .def_readonly("energies", &EnergyDecayReport::energies)
        .def_readonly("fitted_slope", &EnergyDecayReport::fitted_slope)
        .def_readonly("fit_residual", &EnergyDecayReport::fit_residual)
        .def_readonly("fit_window", &EnergyDecayReport::fit_window)
        .def_readonly("monotone", &EnergyDecayReport::monotone);
    m.def("energy_decay_fit", &energy_decay_fit, py::arg("trajectory"), py::arg("t_lo") = 0.0,
          py::arg("t_hi") = 0.0);

    // --- half-line model --------------------------------------------------
    py::class_<TailMasses>(m, "TailMasses")
        .def_readonly("h", &TailMasses::h)
        .def_readonly("time", &TailMasses::time)
        .def_readonly("betas", &TailMasses::betas);
    m.def("tail_masses", &tail_masses, py::arg("field"), py::arg("h"), py::arg("k_max"));
    m.def("rhs_constrained", &rhs_constrained);
    m.def(
        "solve_constrained",
        [](const DensityField& f, const ModelParams& p, double t_end, double dt,
           const std::vector<double>& times) {
            return solve_constrained(f, p, t_end, dt, times);
        },
        py::arg("f_in"), py::arg("params"), py::arg("t_end"), py::arg("dt"),
        py::arg("output_times") = std::vector<double>{});
    m.def("beta_lower_bound", &beta_lower_bound, py::arg("beta0"), py::arg("eta"), py::arg("t"));

    py::class_<SplitField>(m, "SplitField")
        .def_readonly("f_plus", &SplitField::f_plus)
        .def_readonly("f_minus_mass", &SplitField::f_minus_mass)
        .def_readonly("time", &SplitField::time);
    m.def("split_field", &split_field, py::arg("field"), py::arg("eps"));
    m.def("beta_derivative_check", &beta_derivative_check, py::arg("trajectory"),
          py::arg("params"));

    // --- limit models -------------------------------------------------------
    py::enum_<FieldSampling>(m, "FieldSampling")
        .value("CellAverage", FieldSampling::CellAverage)
        .value("NodeSample", FieldSampling::NodeSample);

    m.def("solve_heat", &solve_heat, py::arg("f_in"), py::arg("diffusivity"), py::arg("t_end"));

    py::class_<LimitRunReport>(m, "LimitRunReport")
        .def_readonly("trajectory", &LimitRunReport::trajectory)
        .def_readonly("times", &LimitRunReport::times)
        .def_readonly("mass_series", &LimitRunReport::mass_series)
        .def_readonly("internal_time_series", &LimitRunReport::internal_time_series)
        .def_readonly("sampling", &LimitRunReport::sampling);
    m.def(
        "solve_nonlocal_diffusion",
        [](const DensityField& f, double eta, double t_end, double dt,
           const std::vector<double>& times) {
            return solve_nonlocal_diffusion(f, eta, t_end, dt, times);
        },
        py::arg("f_in"), py::arg("eta"), py::arg("t_end"), py::arg("dt"),
        py::arg("output_times") = std::vector<double>{});
    m.def(
        "reparametrized_oracle",
        [](const DensityField& f, double eta, double t_end, const std::vector<double>& times,
           FieldSampling sampling) {
            return reparametrized_oracle(f, eta, t_end, times, sampling);
        },
        py::arg("f_in"), py::arg("eta"), py::arg("t_end"),
        py::arg("output_times") = std::vector<double>{},
        py::arg("sampling") = FieldSampling::NodeSample);

    py::class_<SpaceTimeTestFunction>(m, "SpaceTimeTestFunction")
        .def_readonly("name", &SpaceTimeTestFunction::name)
        .def("value", [](const SpaceTimeTestFunction& f, double t, double x) {
            return f.value(t, x);
        });
    m.def("test_function_library", &test_function_library, py::arg("t_final"));
    m.def("weak_form_residual", &weak_form_residual, py::arg("report"), py::arg("eta"),
          py::arg("test_fn"), py::arg("f_in"));

    // --- game simulator -----------------------------------------------------
    py::class_<GameOutcome>(m, "GameOutcome")
        .def_readonly("delta_a", &GameOutcome::delta_a)
        .def_readonly("delta_b", &GameOutcome::delta_b);
    m.def("play_round", &play_round, py::arg("choice_a"), py::arg("choice_b"), py::arg("h"));

    py::class_<AgentPopulation>(m, "AgentPopulation")
        .def(py::init<std::vector<double>, double, double>(), py::arg("wealths"),
             py::arg("total_mass"), py::arg("stake"))
        .def_static("sample_uniform", &AgentPopulation::sample_uniform, py::arg("n_agents"),
                    py::arg("a"), py::arg("b"), py::arg("total_mass"), py::arg("stake"),
                    py::arg("seed"))
        .def_property_readonly("size", &AgentPopulation::size)
        .def_property_readonly("stake", &AgentPopulation::stake)
        .def_property_readonly("agent_weight", &AgentPopulation::agent_weight)
        .def_readwrite("time", &AgentPopulation::time)
        .def("wealth", &AgentPopulation::wealth)
        .def("wealths", &AgentPopulation::wealths)
        .def("total_wealth", &AgentPopulation::total_wealth)
        .def("min_wealth", &AgentPopulation::min_wealth);
    m.def("step_population", &step_population, py::arg("pop"), py::arg("params"), py::arg("dt"),
          py::arg("seed"));
    m.def("histogram", &histogram, py::arg("pop"), py::arg("grid"));

    // --- harness --------------------------------------------------------------
    py::class_<InvariantResult>(m, "InvariantResult")
        .def_readonly("name", &InvariantResult::name)
        .def_readonly("pass_", &InvariantResult::pass)
        .def_readonly("observed", &InvariantResult::observed)
        .def_readonly("threshold", &InvariantResult::threshold);

    py::class_<RunConfig>(m, "RunConfig");
    m.def("parse_config_text", &parse_config_text);
    m.def("parse_config_file", &parse_config_file);
    m.def(
        "run_single",
        [](const RunConfig& cfg, const std::string& out_dir, bool plots) {
            const RunArtifacts art = run_single(cfg, out_dir, plots);
            py::dict d;
            d["model"] = to_string(art.model);
            d["out_dir"] = art.out_dir.string();
            d["n_samples"] = art.trajectory.size();
            d["invariants_pass"] = art.invariants_pass();
            py::list inv;
            for (const InvariantResult& r : art.invariants)
                inv.append(py::make_tuple(r.name, r.pass, r.observed, r.threshold));
            d["invariants"] = inv;
            return d;
        },
        py::arg("config"), py::arg("out_dir"), py::arg("plots") = false);
    m.def(
        "epsilon_sweep",
        [](const RunConfig& cfg, const std::string& out_dir, int jobs) {
            const ConvergenceReport rep = epsilon_sweep(cfg, out_dir, jobs);
            py::dict d;
            d["eps_list"] = rep.eps_list;
            d["errors"] = rep.errors;
            d["fitted_order"] = rep.fitted_order;
            d["fit_residual"] = rep.fit_residual;
            d["monotone"] = rep.monotone;
            d["f_minus_mass"] = rep.f_minus_mass;
            d["limit_lost_mass"] = rep.limit_lost_mass;
            return d;
        },
        py::arg("config"), py::arg("out_dir"), py::arg("jobs") = 1);
    m.def(
        "mc_compare",
        [](const RunConfig& cfg, const std::string& out_dir) {
            const McCompareReport rep = mc_compare(cfg, out_dir);
            py::dict d;
            d["times"] = rep.times;
            d["distances"] = rep.distances;
            d["tolerances"] = rep.tolerances;
            d["exceed_count"] = rep.exceed_count;
            return d;
        },
        py::arg("config"), py::arg("out_dir"));
    m.def(
        "check_invariants",
        [](const std::string& run_dir) {
            py::list out;
            for (const InvariantResult& r : check_invariants(run_dir))
                out.append(py::make_tuple(r.name, r.pass, r.observed, r.threshold));
            return out;
        },
        py::arg("run_dir"));
}
