#include "rps/limit_models.hpp"
#include "rps/errors.hpp"
#include "time_stepping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rps {

namespace {

// Constant run [a, b) of a piecewise-constant function.
struct Run {
    double a, b, value;
};

std::vector<Run> merge_runs(const DensityField& f, FieldSampling sampling) {
    std::vector<Run> runs;
    const Grid1D& g = f.grid;
    const double half = 0.5 * g.dx;
    for (int i = 0; i < g.n_cells; ++i) {
        const double v = f.values[static_cast<size_t>(i)];
        if (v == 0.0) continue;
        double a, b;
        if (sampling == FieldSampling::CellAverage) {
            a = g.left_edge(i);
            b = g.left_edge(i + 1);
        } else {
            const double x = g.x_min + i * g.dx;
            a = x - half;
            b = x + half;
        }
        if (!runs.empty() && runs.back().b == a && runs.back().value == v)
            runs.back().b = b;
        else
            runs.push_back({a, b, v});
    }
    return runs;
}

// 0.5 (erf((x-a)/s) - erf((x-b)/s)): heat smoothing of 1_{[a,b)}, s = sqrt(4 D t).
double smoothed_indicator(double x, double a, double b, double s) {
    return 0.5 * (std::erf((x - a) / s) - std::erf((x - b) / s));
}

// antiderivative of erf: A(u) = u erf(u) + exp(-u^2)/sqrt(pi)
double erf_antideriv(double u) {
    return u * std::erf(u) + std::exp(-u * u) / std::sqrt(std::numbers::pi);
}

} // namespace

DensityField solve_heat(const DensityField& f_in, double diffusivity, double t_end) {
    if (diffusivity < 0.0 || !std::isfinite(diffusivity))
        throw std::invalid_argument("solve_heat: diffusivity must be finite and >= 0");
    if (t_end < 0.0 || !std::isfinite(t_end))
        throw std::invalid_argument("solve_heat: t_end must be finite and >= 0");
    require_finite(f_in, "solve_heat");
    if (diffusivity * t_end == 0.0) {
        DensityField out = f_in;
        out.time = f_in.time + t_end;
        return out;
    }
    const double s = 2.0 * std::sqrt(diffusivity * t_end);
    const std::vector<Run> runs = merge_runs(f_in, FieldSampling::CellAverage);
    DensityField out = zero_field(f_in.grid);
    out.time = f_in.time + t_end;
    for (int i = 0; i < f_in.grid.n_cells; ++i) {
        const double x = f_in.grid.center(i);
        double v = 0.0;
        for (const Run& r : runs)
            v += r.value * smoothed_indicator(x, r.a, r.b, s);
        out.values[static_cast<size_t>(i)] = v;
    }
    return out;
}

namespace {

// Exact half-line heat solution with absorbing boundary, from odd-reflection
// images of a piecewise-constant initial condition on (0, inf).
class HalfLineHeat {
public:
    HalfLineHeat(const DensityField& f_in, FieldSampling sampling) {
        runs_ = merge_runs(f_in, sampling);
        for (Run& r : runs_) {
            r.a = std::max(r.a, 0.0);
            if (r.b <= r.a) r.value = 0.0;
        }
        std::erase_if(runs_, [](const Run& r) { return r.value == 0.0 || r.b <= r.a; });
        mass0_ = 0.0;
        for (const Run& r : runs_) mass0_ += r.value * (r.b - r.a);
    }

    double initial_mass() const { return mass0_; }

    double value(double tau, double x) const {
        if (tau <= 0.0) {
            double v = 0.0;
            for (const Run& r : runs_)
                if (x >= r.a && x < r.b) v += r.value;
            return v;
        }
        const double s = 2.0 * std::sqrt(tau);
        double v = 0.0;
        for (const Run& r : runs_) {
            v += r.value * smoothed_indicator(x, r.a, r.b, s);
            v -= r.value * smoothed_indicator(x, -r.b, -r.a, s); // negative image
        }
        return v;
    }

    // M(tau) = integral over (0, inf); closed form sum_runs v * int_a^b erf(y / s) dy.
    double remaining_mass(double tau) const {
        if (tau <= 0.0) return mass0_;
        const double s = 2.0 * std::sqrt(tau);
        double m = 0.0;
        for (const Run& r : runs_)
            m += r.value * s * (erf_antideriv(r.b / s) - erf_antideriv(r.a / s));
        return m;
    }

private:
    std::vector<Run> runs_;
    double mass0_ = 0.0;
};

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0)
        throw NumericalError("adaptive_simpson: max depth reached");
    if (std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

LimitRunReport solve_nonlocal_diffusion(const DensityField& f_in, double eta,
                                        double t_end, double dt,
                                        std::span<const double> output_times) {
    if (!(eta > 0.0))
        throw ConfigError("solve_nonlocal_diffusion: eta must be positive");
    if (std::abs(f_in.grid.x_min) > 1e-12)
        throw ConfigError("solve_nonlocal_diffusion: grid must start at x_min = 0");
    require_finite(f_in, "solve_nonlocal_diffusion");
    if (min_value(f_in) < 0.0)
        throw std::invalid_argument("solve_nonlocal_diffusion: initial datum must be non-negative");

    const Grid1D& g = f_in.grid;
    const double rho = mass(f_in);
    const double cap = 0.5 * g.dx * g.dx * 3.0 / (2.0 * eta * std::max(rho, 1e-300));
    if (!(dt > 0.0) || dt > cap * (1.0 + 1e-12))
        throw NumericalError("solve_nonlocal_diffusion: dt exceeds the parabolic cap dx^2 * 3/(4 eta rho) = " +
                             std::to_string(cap));
    const std::vector<double> times = detail::resolve_output_times(output_times, t_end);

    std::vector<double> y = f_in.values;
    y[0] = 0.0; // Dirichlet trace at the x = 0 node
    const double inv_dx2 = 1.0 / (g.dx * g.dx);
    const int n = g.n_cells;
    auto current_mass = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s * g.dx;
    };
    // Laplacian with odd extension across x = 0 (keeps node 0 at zero) and
    // zero beyond the truncated top.
    auto rhs = [&](const std::vector<double>& in, std::vector<double>& out) {
        const double d = eta / 3.0 * current_mass(in);
        out[0] = 0.0;
        for (int i = 1; i < n; ++i) {
            const double up = (i + 1 < n) ? in[static_cast<size_t>(i + 1)] : 0.0;
            out[static_cast<size_t>(i)] =
                d * (up - 2.0 * in[static_cast<size_t>(i)] + in[static_cast<size_t>(i - 1)]) * inv_dx2;
        }
    };

    detail::Rk4Scratch scratch;
    scratch.resize(y.size());
    LimitRunReport rep;
    rep.sampling = FieldSampling::NodeSample;
    double t = 0.0;
    double tau = 0.0;
    for (double target : times) {
        const int m = detail::substep_count(target - t, dt);
        if (m > 0) {
            const double step = (target - t) / m;
            for (int s = 0; s < m; ++s) {
                const double m_pre = current_mass(y);
                detail::rk4_step(y, step, rhs, scratch);
                y[0] = 0.0;
                tau += step * eta / 6.0 * (m_pre + current_mass(y));
            }
        }
        t = target;
        DensityField snap = field_from_values(g, y, t);
        require_finite(snap, "solve_nonlocal_diffusion");
        rep.times.push_back(t);
        rep.mass_series.push_back(current_mass(y));
        rep.internal_time_series.push_back(tau);
        rep.trajectory.push_back(std::move(snap));
    }
    return rep;
}

LimitRunReport reparametrized_oracle(const DensityField& f_in, double eta, double t_end,
                                     std::span<const double> output_times,
                                     FieldSampling sampling) {
    if (!(eta > 0.0))
        throw ConfigError("reparametrized_oracle: eta must be positive");
    require_finite(f_in, "reparametrized_oracle");
    const std::vector<double> times = detail::resolve_output_times(output_times, t_end);
    const HalfLineHeat exact(f_in, sampling);
    const Grid1D& g = f_in.grid;

    auto point = [&](int i) {
        return sampling == FieldSampling::NodeSample ? g.x_min + i * g.dx : g.center(i);
    };

    LimitRunReport rep;
    rep.sampling = sampling;
    if (exact.initial_mass() <= 0.0) {
        for (double t : times) {
            rep.times.push_back(t);
            rep.mass_series.push_back(0.0);
            rep.internal_time_series.push_back(0.0);
            DensityField z = zero_field(g);
            z.time = t;
            rep.trajectory.push_back(std::move(z));
        }
        return rep;
    }

    // Physical time as a function of diffusive time, t(tau) = int 3/(eta M).
    // Integrated in sigma = sqrt(tau): M has a sqrt(tau) expansion when the
    // initial datum touches the boundary, but is smooth in sigma.
    auto speed_sigma = [&](double sig) {
        return 6.0 * sig / (eta * exact.remaining_mass(sig * sig));
    };
    auto physical_time = [&](double tau) {
        if (tau <= 0.0) return 0.0;
        const double s_hi = std::sqrt(tau);
        return integrate(speed_sigma, 0.0, s_hi, 1e-14 * (1.0 + s_hi));
    };
    auto invert = [&](double t_phys) {
        if (t_phys <= 0.0) return 0.0;
        double lo = 0.0;
        // tau <= (eta/3) rho t, padded so quadrature round-off cannot spoil
        // the bracket
        double hi = eta / 3.0 * exact.initial_mass() * t_phys * (1.0 + 1e-9);
        if (physical_time(hi) < t_phys * (1.0 - 1e-9))
            throw NumericalError("reparametrized_oracle: t = " + std::to_string(t_phys) +
                                 " beyond the reachable horizon (max " +
                                 std::to_string(physical_time(hi)) + ")");
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (physical_time(mid) < t_phys)
                lo = mid;
            else
                hi = mid;
            if (hi - lo <= 1e-14 * (1.0 + hi)) break;
        }
        return 0.5 * (lo + hi);
    };

    for (double t : times) {
        const double tau = invert(t);
        DensityField snap = zero_field(g);
        snap.time = t;
        for (int i = 0; i < g.n_cells; ++i)
            snap.values[static_cast<size_t>(i)] = exact.value(tau, point(i));
        rep.times.push_back(t);
        rep.mass_series.push_back(exact.remaining_mass(tau));
        rep.internal_time_series.push_back(tau);
        rep.trajectory.push_back(std::move(snap));
    }
    return rep;
}

std::vector<SpaceTimeTestFunction> test_function_library(double t_final) {
    if (!(t_final > 0.0))
        throw std::invalid_argument("test_function_library: t_final must be positive");
    const double T = t_final;
    std::vector<SpaceTimeTestFunction> lib;
    lib.push_back({"poly_exp",
                   [T](double t, double x) { return (T - t) * x * x * std::exp(-x); },
                   [](double, double x) { return -x * x * std::exp(-x); },
                   [T](double t, double x) { return (T - t) * (x * x - 4.0 * x + 2.0) * std::exp(-x); }});
    lib.push_back({"gauss_bump",
                   [T](double t, double x) { return (T - t) * x * std::exp(-x * x); },
                   [](double, double x) { return -x * std::exp(-x * x); },
                   [T](double t, double x) { return (T - t) * (4.0 * x * x * x - 6.0 * x) * std::exp(-x * x); }});
    const double w = 0.5 * std::numbers::pi / T;
    lib.push_back({"cos_ramp",
                   [w](double t, double x) { return std::cos(w * t) * x * x * std::exp(-0.5 * x); },
                   [w](double t, double x) { return -w * std::sin(w * t) * x * x * std::exp(-0.5 * x); },
                   [w](double t, double x) {
                       return std::cos(w * t) * (2.0 - 2.0 * x + 0.25 * x * x) * std::exp(-0.5 * x);
                   }});
    return lib;
}

double weak_form_residual(const LimitRunReport& report, double eta,
                          const SpaceTimeTestFunction& test_fn,
                          const DensityField& f_in) {
    if (report.times.size() < 2)
        throw std::invalid_argument("weak_form_residual: need at least 2 samples");
    const double T = report.times.back();
    const Grid1D& g = f_in.grid;
    auto point = [&](int i) {
        return report.sampling == FieldSampling::NodeSample ? g.x_min + i * g.dx : g.center(i);
    };
    for (int i = 0; i < g.n_cells; i += std::max(1, g.n_cells / 64))
        if (std::abs(test_fn.value(T, point(i))) > 1e-12)
            throw std::invalid_argument("weak_form_residual: test function must vanish at t = T");

    // space integrals at each sample
    auto space_integral = [&](const DensityField& f, auto&& phi, double t) {
        double s = 0.0;
        for (int i = 0; i < g.n_cells; ++i)
            s += f.values[static_cast<size_t>(i)] * phi(t, point(i));
        return s * g.dx;
    };

    const size_t n = report.times.size();
    std::vector<double> integrand(n);
    for (size_t j = 0; j < n; ++j) {
        const double t = report.times[j];
        const DensityField& f = report.trajectory[j];
        const double m = j < report.mass_series.size() ? report.mass_series[j] : mass(f);
        integrand[j] = space_integral(f, test_fn.time_derivative, t) +
                       eta / 3.0 * m * space_integral(f, test_fn.second_space_derivative, t);
    }
    double time_integral = 0.0;
    for (size_t j = 0; j + 1 < n; ++j)
        time_integral += 0.5 * (integrand[j] + integrand[j + 1]) * (report.times[j + 1] - report.times[j]);

    const double initial_term = space_integral(f_in, test_fn.value, 0.0);
    return time_integral + initial_term;
}

} // namespace rps
