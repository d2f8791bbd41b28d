#include "rps/grid.hpp"
#include "rps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rps {

Grid1D make_grid(double x_min, double x_max, int n_cells) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max))
        throw ConfigError("make_grid: bounds must be finite");
    if (!(x_min < x_max))
        throw ConfigError("make_grid: x_min must be < x_max");
    if (n_cells < 2)
        throw ConfigError("make_grid: n_cells must be >= 2");
    Grid1D g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n_cells = n_cells;
    g.dx = (x_max - x_min) / n_cells;
    return g;
}

DensityField zero_field(const Grid1D& grid) {
    return DensityField{grid, std::vector<double>(static_cast<size_t>(grid.n_cells), 0.0), 0.0};
}

DensityField field_from_values(const Grid1D& grid, std::vector<double> values, double time) {
    if (static_cast<int>(values.size()) != grid.n_cells)
        throw ConfigError("field_from_values: value count does not match n_cells");
    return DensityField{grid, std::move(values), time};
}

DensityField indicator_field(const Grid1D& grid, double a, double b, double amplitude) {
    if (!(a < b))
        throw ConfigError("indicator_field: requires a < b");
    DensityField f = zero_field(grid);
    for (int i = 0; i < grid.n_cells; ++i) {
        const double lo = std::max(a, grid.left_edge(i));
        const double hi = std::min(b, grid.left_edge(i + 1));
        if (hi > lo)
            f.values[static_cast<size_t>(i)] = amplitude * (hi - lo) / grid.dx;
    }
    return f;
}

DensityField gaussian_field(const Grid1D& grid, double mean, double sigma, double total_mass) {
    if (!(sigma > 0.0))
        throw ConfigError("gaussian_field: sigma must be positive");
    DensityField f = zero_field(grid);
    const double inv = 1.0 / (sigma * std::sqrt(2.0));
    // cell average = mass * (Phi(right) - Phi(left)) / dx
    double cdf_left = 0.5 * (1.0 + std::erf((grid.left_edge(0) - mean) * inv));
    for (int i = 0; i < grid.n_cells; ++i) {
        const double cdf_right = 0.5 * (1.0 + std::erf((grid.left_edge(i + 1) - mean) * inv));
        f.values[static_cast<size_t>(i)] = total_mass * (cdf_right - cdf_left) / grid.dx;
        cdf_left = cdf_right;
    }
    return f;
}

double mass(const DensityField& field) {
    double s = 0.0;
    for (double v : field.values) s += v;
    return s * field.grid.dx;
}

double first_moment(const DensityField& field) {
    double s = 0.0;
    for (int i = 0; i < field.grid.n_cells; ++i)
        s += field.values[static_cast<size_t>(i)] * field.grid.center(i);
    return s * field.grid.dx;
}

double energy(const DensityField& field) {
    double s = 0.0;
    for (double v : field.values) s += v * v;
    return 0.5 * s * field.grid.dx;
}

double linf_norm(const DensityField& field) {
    double m = 0.0;
    for (double v : field.values) m = std::max(m, std::abs(v));
    return m;
}

double min_value(const DensityField& field) {
    double m = field.values.empty() ? 0.0 : field.values.front();
    for (double v : field.values) m = std::min(m, v);
    return m;
}

double l1_distance(const DensityField& a, const DensityField& b) {
    if (!(a.grid == b.grid))
        throw std::invalid_argument("l1_distance: fields live on different grids");
    double s = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i)
        s += std::abs(a.values[i] - b.values[i]);
    return s * a.grid.dx;
}

MomentReport moment_report(const DensityField& field) {
    MomentReport r;
    r.mass = mass(field);
    r.first_moment = first_moment(field);
    r.energy = energy(field);
    r.linf = linf_norm(field);
    r.time = field.time;
    return r;
}

int shift_cells(const Grid1D& grid, double h) {
    if (!(h > 0.0))
        throw ConfigError("payoff h must be positive");
    const double ratio = h / grid.dx;
    const int k = static_cast<int>(std::lround(ratio));
    if (k < 1 || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio))
        throw ConfigError("payoff/grid alignment: h must be a positive integer multiple of dx "
                          "(got h/dx = " + std::to_string(ratio) + ")");
    return k;
}

void require_finite(const DensityField& field, const char* where) {
    for (double v : field.values)
        if (!std::isfinite(v))
            throw NumericalError(std::string(where) + ": non-finite value in density field");
}

} // namespace rps
