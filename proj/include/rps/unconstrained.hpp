#pragma once

#include "rps/grid.hpp"

#include <complex>
#include <span>
#include <utility>
#include <vector>

namespace rps {

using Trajectory = std::vector<DensityField>;

/// Right-hand side of the whole-line exchange model,
///   df/dt = (eta*rho/3) * (f(x+h) + f(x-h) - 2 f(x)),
/// with out-of-domain shifts taken as zero (truncation of the line).
DensityField rhs_unconstrained(const DensityField& field, const ModelParams& params);

/// Classical RK4 integration of rhs_unconstrained, sampled at output_times
/// (ascending, within [0, t_end]; default {0, t_end}). dt must satisfy
/// dt <= 0.5 * 3/(4 eta rho), half the linear-stability budget of the stencil.
Trajectory solve_unconstrained(const DensityField& f_in, const ModelParams& params,
                               double t_end, double dt,
                               std::span<const double> output_times = {});

/// Dirac comb on the lattice h*Z: weight(j) of the atom at x = j*h, with
/// weight(-j) == weight(j). Stores j >= 0 only.
struct LatticeMeasure {
    double spacing = 1.0;
    double time = 0.0;
    std::vector<double> weights;

    int j_max() const { return static_cast<int>(weights.size()) - 1; }
    double weight(int j) const {
        const int a = j < 0 ? -j : j;
        return a <= j_max() ? weights[static_cast<size_t>(a)] : 0.0;
    }
    double total() const;
};

/// Fundamental solution of the whole-line model: w_j = exp(-z) I_j(z) with
/// z = (2 eta rho / 3) t, evaluated by a scaled modified-Bessel series.
/// j_max must make the neglected tail weight < 1e-14 (Poisson tail bound).
LatticeMeasure fundamental_solution(double t, const ModelParams& params, int j_max);

/// Same measure from the Poisson-binomial double sum
///   exp(-z) sum_k (eta rho t / 3)^k / k! * sum_i C(k,i) delta_{(2i-k)h};
/// an independent evaluation used to cross-check the Bessel form.
LatticeMeasure fundamental_solution_series(double t, const ModelParams& params, int j_max);

/// Convolution f(t) = F * f_in on the aligned grid (exact lattice shifts).
DensityField lattice_convolve(const LatticeMeasure& F, const DensityField& f_in);

struct SpectralField {
    std::vector<double> frequencies;
    std::vector<std::complex<double>> amplitudes;
    double time = 0.0;
};

/// DFT of the field: amplitude(xi_m) = sum_i f_i exp(-i xi_m x_i) dx, so the
/// zero mode equals the mass.
SpectralField spectral_transform(const DensityField& field);

/// Exact Fourier-multiplier propagation on the periodically extended grid:
/// each mode is scaled by exp((2 rho eta/3)(cos(h xi) - 1) t). Agrees with the
/// truncated solver while the support stays away from the boundary.
DensityField spectral_solve(const DensityField& f_in, double t, const ModelParams& params);

struct EnergyDecayReport {
    std::vector<double> times;
    std::vector<double> energies;
    double fitted_slope = 0.0;
    double fit_intercept = 0.0;
    double fit_residual = 0.0;          // rms of log-log fit residuals
    std::pair<double, double> fit_window{0.0, 0.0};
    bool monotone = true;               // energies non-increasing (1e-12 relative)
};

/// Least-squares slope of log E vs log t over [t_lo, t_hi] (default: the last
/// decade of the trajectory). The window must span at least a decade and hold
/// at least three samples.
EnergyDecayReport energy_decay_fit(const Trajectory& trajectory,
                                   double t_lo = 0.0, double t_hi = 0.0);

} // namespace rps
