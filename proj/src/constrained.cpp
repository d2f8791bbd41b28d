#include "rps/constrained.hpp"
#include "rps/errors.hpp"
#include "time_stepping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rps {

namespace {

void check_params(const ModelParams& p) {
    if (!(p.eta > 0.0) || !(p.rho > 0.0) || !(p.h > 0.0))
        throw ConfigError("model parameters eta, h, rho must be positive");
}

void check_halfline(const Grid1D& grid) {
    if (std::abs(grid.x_min) > 1e-12)
        throw ConfigError("constrained model: grid must start at x_min = 0");
}

double tail_from(const std::vector<double>& y, int first_cell, double dx) {
    double s = 0.0;
    for (size_t i = static_cast<size_t>(first_cell); i < y.size(); ++i) s += y[i];
    return s * dx;
}

// Gated stencil scaled by c = eta*beta/3. Cells are gated by their center:
// with k*h on cell boundaries, center >= m*h means index >= m*k.
void gated_stencil(const std::vector<double>& y, std::vector<double>& out,
                   int k, double c) {
    const int n = static_cast<int>(y.size());
    for (int i = 0; i < n; ++i) {
        double v = 0.0;
        if (i + k < n) v += y[static_cast<size_t>(i + k)];          // gain from above, all x >= 0
        if (i >= 2 * k) v += y[static_cast<size_t>(i - k)];         // gain from below, x >= 2h
        if (i >= k) v -= 2.0 * y[static_cast<size_t>(i)];           // loss, x >= h
        out[static_cast<size_t>(i)] = c * v;
    }
}

} // namespace

TailMasses tail_masses(const DensityField& field, double h, int k_max) {
    if (k_max < 0)
        throw std::invalid_argument("tail_masses: k_max must be >= 0");
    shift_cells(field.grid, h); // alignment so that k*h are cell boundaries
    TailMasses tm;
    tm.h = h;
    tm.time = field.time;
    tm.betas.assign(static_cast<size_t>(k_max) + 1, 0.0);
    // suffix sums over whole cells; k*h boundaries align with cell edges
    const int n = field.grid.n_cells;
    std::vector<double> suffix(static_cast<size_t>(n) + 1, 0.0);
    for (int i = n - 1; i >= 0; --i)
        suffix[static_cast<size_t>(i)] = suffix[static_cast<size_t>(i) + 1] + field.values[static_cast<size_t>(i)];
    for (int m = 0; m <= k_max; ++m) {
        // first cell whose center exceeds m*h; m*h must be a cell boundary
        const double exact = (static_cast<double>(m) * h - field.grid.x_min) / field.grid.dx;
        const long long first = std::lround(exact);
        if (std::abs(exact - static_cast<double>(first)) > 1e-9)
            throw std::invalid_argument("tail_masses: k*h does not fall on a cell boundary");
        const long long idx = std::max<long long>(first, 0);
        tm.betas[static_cast<size_t>(m)] =
            (idx < n) ? suffix[static_cast<size_t>(idx)] * field.grid.dx : 0.0;
    }
    return tm;
}

DensityField rhs_constrained(const DensityField& field, const ModelParams& params) {
    check_params(params);
    check_halfline(field.grid);
    const int k = shift_cells(field.grid, params.h);
    const double beta = tail_from(field.values, k, field.grid.dx);
    DensityField out = zero_field(field.grid);
    out.time = field.time;
    gated_stencil(field.values, out.values, k, params.eta * beta / 3.0);
    return out;
}

Trajectory solve_constrained(const DensityField& f_in, const ModelParams& params,
                             double t_end, double dt,
                             std::span<const double> output_times) {
    check_params(params);
    check_halfline(f_in.grid);
    require_finite(f_in, "solve_constrained");
    if (min_value(f_in) < 0.0)
        throw std::invalid_argument("solve_constrained: initial datum must be non-negative");
    const int k = shift_cells(f_in.grid, params.h);
    const double cap = 0.5 * 3.0 / (4.0 * params.eta * params.rho); // beta <= rho
    if (!(dt > 0.0) || dt > cap * (1.0 + 1e-12))
        throw NumericalError("solve_constrained: dt exceeds the stability cap 3/(8 eta rho) = " +
                             std::to_string(cap));
    const std::vector<double> times = detail::resolve_output_times(output_times, t_end);

    std::vector<double> y = f_in.values;
    detail::Rk4Scratch scratch;
    scratch.resize(y.size());
    const double dx = f_in.grid.dx;
    auto rhs = [&](const std::vector<double>& in, std::vector<double>& out) {
        const double beta = tail_from(in, k, dx);
        gated_stencil(in, out, k, params.eta * beta / 3.0);
    };

    Trajectory traj;
    traj.reserve(times.size());
    double t = 0.0;
    for (double target : times) {
        if (tail_from(y, k, dx) < 1e-14) {
            // frozen state: nobody can stake the wager, rhs vanishes
            t = target;
        } else {
            const int m = detail::substep_count(target - t, dt);
            if (m > 0) {
                const double step = (target - t) / m;
                for (int s = 0; s < m; ++s)
                    detail::rk4_step(y, step, rhs, scratch);
            }
            t = target;
        }
        DensityField snap = field_from_values(f_in.grid, y, t);
        require_finite(snap, "solve_constrained");
        traj.push_back(std::move(snap));
    }
    return traj;
}

double beta_lower_bound(double beta0, double eta, double t) {
    if (beta0 < 0.0 || t < 0.0 || !(eta > 0.0))
        throw std::invalid_argument("beta_lower_bound: requires beta0 >= 0, t >= 0, eta > 0");
    return beta0 / (beta0 * eta * t / 3.0 + 1.0);
}

SplitField split_field(const DensityField& field, double eps) {
    const double ratio = (eps - field.grid.x_min) / field.grid.dx;
    const long edge = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(edge)) > 1e-9 * std::max(1.0, std::abs(ratio)))
        throw std::invalid_argument("split_field: eps must lie on a cell boundary");
    SplitField s{zero_field(field.grid), 0.0, field.time};
    s.f_plus.time = field.time;
    double minus = 0.0;
    for (int i = 0; i < field.grid.n_cells; ++i) {
        if (i >= edge)
            s.f_plus.values[static_cast<size_t>(i)] = field.values[static_cast<size_t>(i)];
        else
            minus += field.values[static_cast<size_t>(i)];
    }
    s.f_minus_mass = minus * field.grid.dx;
    return s;
}

double beta_derivative_check(const Trajectory& trajectory, const ModelParams& params) {
    if (trajectory.size() < 3)
        throw std::invalid_argument("beta_derivative_check: need at least 3 samples");
    const size_t n = trajectory.size();
    const double dt0 = trajectory[1].time - trajectory[0].time;
    for (size_t i = 1; i < n; ++i) {
        const double d = trajectory[i].time - trajectory[i - 1].time;
        if (!(d > 0.0) || std::abs(d - dt0) > 1e-9 * dt0)
            throw std::invalid_argument("beta_derivative_check: samples must be uniformly spaced");
    }
    std::vector<double> b1(n), b2(n);
    for (size_t i = 0; i < n; ++i) {
        const TailMasses tm = tail_masses(trajectory[i], params.h, 2);
        b1[i] = tm.betas[1];
        b2[i] = tm.betas[2];
    }
    double worst = 0.0;
    for (size_t i = 1; i + 1 < n; ++i) {
        const double dbdt = (b1[i + 1] - b1[i - 1]) / (2.0 * dt0);
        const double res = std::abs(dbdt + params.eta / 3.0 * b1[i] * (b1[i] - b2[i]));
        worst = std::max(worst, res);
    }
    return worst;
}

} // namespace rps
