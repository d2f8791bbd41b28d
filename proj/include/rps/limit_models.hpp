#pragma once

#include "rps/grid.hpp"
#include "rps/unconstrained.hpp" // Trajectory

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rps {

/// How a field's values relate to the grid. CellAverage is the library-wide
/// default; the half-line limit solver works with point samples at the nodes
/// x_i = x_min + i*dx so that the Dirichlet node sits exactly at x = 0.
enum class FieldSampling { CellAverage, NodeSample };

/// Whole-line heat evolution df/dt = D d2f/dx2 of the piecewise-constant
/// input, evaluated in closed form (erf differences) at the cell centers.
DensityField solve_heat(const DensityField& f_in, double diffusivity, double t_end);

struct LimitRunReport {
    Trajectory trajectory;
    std::vector<double> times;
    std::vector<double> mass_series;          // integral of f at each sample
    std::vector<double> internal_time_series; // diffusive time tau(t), empty for solve_heat
    FieldSampling sampling = FieldSampling::CellAverage;
};

/// Mass-dependent nonlocal diffusion on the half line,
///   df/dt = (eta/3) (integral of f) d2f/dx2,   f(t, 0) = 0,
/// central differences in space, RK4 in time. The grid must start at 0 and
/// values are node samples; node 0 is held at zero through an odd-extension
/// ghost, so its value stays exactly 0. dt must satisfy
/// dt <= 0.5 * dx^2 * 3/(2 eta rho).
LimitRunReport solve_nonlocal_diffusion(const DensityField& f_in, double eta,
                                        double t_end, double dt,
                                        std::span<const double> output_times = {});

/// Semi-analytic solution of the same problem via the time change
/// tau(t) = (eta/3) integral_0^t M(s) ds: the half-line heat equation with
/// unit diffusivity and absorbing boundary is solved exactly by odd-reflection
/// images, M(tau) is evaluated in closed form, and physical time is recovered
/// from dt/dtau = 3 / (eta M(tau)). Independent of the finite-difference path.
LimitRunReport reparametrized_oracle(const DensityField& f_in, double eta, double t_end,
                                     std::span<const double> output_times = {},
                                     FieldSampling sampling = FieldSampling::NodeSample);

/// Smooth space-time test function with the derivatives needed by the very
/// weak form. All shipped functions vanish at the final time and at x = 0.
struct SpaceTimeTestFunction {
    std::string name;
    std::function<double(double, double)> value;
    std::function<double(double, double)> time_derivative;
    std::function<double(double, double)> second_space_derivative;
};

std::vector<SpaceTimeTestFunction> test_function_library(double t_final);

/// Quadrature residual of the very weak formulation
///   I = int int f dphi/dt + (eta/3) int M(t) int f d2phi/dx2 + int f_in phi(0,.)
/// (midpoint in x, trapezoid in t over the report samples). Tends to 0 under
/// refinement exactly when the trajectory solves the nonlocal problem.
double weak_form_residual(const LimitRunReport& report, double eta,
                          const SpaceTimeTestFunction& test_fn,
                          const DensityField& f_in);

} // namespace rps
