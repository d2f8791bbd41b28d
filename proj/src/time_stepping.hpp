#pragma once

// Internal RK4 helpers shared by the kinetic and limit solvers.

#include "rps/errors.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace rps::detail {

struct Rk4Scratch {
    std::vector<double> k1, k2, k3, k4, tmp;
    void resize(size_t n) {
        k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n); tmp.resize(n);
    }
};

// rhs(y, out): writes dy/dt into out. y is advanced in place by one step.
template <class Rhs>
void rk4_step(std::vector<double>& y, double dt, Rhs&& rhs, Rk4Scratch& s) {
    const size_t n = y.size();
    rhs(y, s.k1);
    for (size_t i = 0; i < n; ++i) s.tmp[i] = y[i] + 0.5 * dt * s.k1[i];
    rhs(s.tmp, s.k2);
    for (size_t i = 0; i < n; ++i) s.tmp[i] = y[i] + 0.5 * dt * s.k2[i];
    rhs(s.tmp, s.k3);
    for (size_t i = 0; i < n; ++i) s.tmp[i] = y[i] + dt * s.k3[i];
    rhs(s.tmp, s.k4);
    const double w = dt / 6.0;
    for (size_t i = 0; i < n; ++i)
        y[i] += w * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
}

// Validates requested sample times and returns them (default {0, t_end}).
inline std::vector<double> resolve_output_times(std::span<const double> requested, double t_end) {
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
        throw ConfigError("t_end must be finite and non-negative");
    if (requested.empty())
        return t_end > 0.0 ? std::vector<double>{0.0, t_end} : std::vector<double>{0.0};
    std::vector<double> out(requested.begin(), requested.end());
    double prev = -1.0;
    for (double t : out) {
        if (!std::isfinite(t) || t < 0.0 || t > t_end * (1.0 + 1e-12) + 1e-300)
            throw ConfigError("output times must lie in [0, t_end]");
        if (t <= prev)
            throw ConfigError("output times must be strictly increasing");
        prev = t;
    }
    return out;
}

// Number of uniform substeps covering an interval with step <= dt_max.
inline int substep_count(double interval, double dt_max) {
    if (interval <= 0.0) return 0;
    return static_cast<int>(std::ceil(interval / dt_max - 1e-12));
}

} // namespace rps::detail
