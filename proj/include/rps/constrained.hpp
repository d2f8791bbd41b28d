#pragma once

#include "rps/grid.hpp"
#include "rps/unconstrained.hpp" // Trajectory

#include <span>
#include <vector>

namespace rps {

/// Nested tail masses beta_k = integral of f over [k*h, infinity).
/// beta_0 is the total mass, beta_1 the wager-able tail that drives the
/// constrained dynamics.
struct TailMasses {
    double h = 1.0;
    double time = 0.0;
    std::vector<double> betas; // k = 0..k_max
};

TailMasses tail_masses(const DensityField& field, double h, int k_max);

/// Right-hand side of the no-debt model on the half line,
///   df/dt = (eta/3) beta(t) [ 1_{x>=2h} f(x-h) + 1_{x>=0} f(x+h) - 1_{x>=h} 2 f(x) ],
/// with beta recomputed from the current field and indicators evaluated at
/// cell centers (k*h fall on cell boundaries by alignment).
DensityField rhs_constrained(const DensityField& field, const ModelParams& params);

/// RK4 integration of rhs_constrained. Stability cap as in the unconstrained
/// solver with rho bounding beta. When beta drops below 1e-14 the state is
/// frozen and time is fast-forwarded.
Trajectory solve_constrained(const DensityField& f_in, const ModelParams& params,
                             double t_end, double dt,
                             std::span<const double> output_times = {});

/// Closed-form lower bound beta(0) / (beta(0) * eta * t / 3 + 1).
double beta_lower_bound(double beta0, double eta, double t);

/// Split at the cell boundary eps: f_plus keeps cells with center > eps,
/// f_minus_mass is the mass of the complement (the Dirac-forming part in the
/// vanishing-wager limit).
struct SplitField {
    DensityField f_plus;
    double f_minus_mass = 0.0;
    double time = 0.0;
};

SplitField split_field(const DensityField& field, double eps);

/// Max over interior samples of |d(beta)/dt + (eta/3) beta (beta_1 - beta_2)|
/// with the derivative from centered differences of the sampled trajectory
/// (uniform sampling required). Second-order small in the sample spacing.
double beta_derivative_check(const Trajectory& trajectory, const ModelParams& params);

} // namespace rps
