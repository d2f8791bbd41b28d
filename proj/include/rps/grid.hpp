#pragma once

#include <vector>

namespace rps {

/// Uniform 1D grid. Cell i covers [x_min + i*dx, x_min + (i+1)*dx).
struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_cells = 2;
    double dx = 0.5;

    double center(int i) const { return x_min + (i + 0.5) * dx; }
    double left_edge(int i) const { return x_min + i * dx; }
    double length() const { return x_max - x_min; }

    bool operator==(const Grid1D& o) const {
        return x_min == o.x_min && x_max == o.x_max && n_cells == o.n_cells;
    }
};

Grid1D make_grid(double x_min, double x_max, int n_cells);

/// Piecewise-constant density: values[i] is the cell average of f on cell i
/// (units mass/length). The nonlocal limit solver reinterprets values as node
/// samples, see limit_models.hpp.
struct DensityField {
    Grid1D grid;
    std::vector<double> values;
    double time = 0.0;
};

struct MomentReport {
    double mass = 0.0;
    double first_moment = 0.0;
    double energy = 0.0;
    double linf = 0.0;
    double time = 0.0;
};

/// Model parameters of the binary game. `h` is the wager (called eps in the
/// rescaled systems); rho is the conserved total mass of the initial datum.
struct ModelParams {
    double eta = 1.0;
    double h = 1.0;
    double rho = 1.0;
    bool constrained = false;
};

DensityField zero_field(const Grid1D& grid);
DensityField field_from_values(const Grid1D& grid, std::vector<double> values, double time = 0.0);

/// Cell-averaged indicator amplitude * 1_{[a,b)}; partially covered cells get
/// the exact overlap fraction.
DensityField indicator_field(const Grid1D& grid, double a, double b, double amplitude = 1.0);

/// Cell-averaged Gaussian of given total mass (exact averages via erf differences).
DensityField gaussian_field(const Grid1D& grid, double mean, double sigma, double total_mass = 1.0);

// Midpoint-rule integrals on cell averages.
double mass(const DensityField& field);
double first_moment(const DensityField& field);
double energy(const DensityField& field);
double linf_norm(const DensityField& field);
double min_value(const DensityField& field);
double l1_distance(const DensityField& a, const DensityField& b);

MomentReport moment_report(const DensityField& field);

/// Exact-shift alignment: h must be a positive integer multiple of dx
/// (within 1e-9 relative). Returns h/dx; throws ConfigError otherwise.
int shift_cells(const Grid1D& grid, double h);

/// Throws NumericalError if any value is non-finite.
void require_finite(const DensityField& field, const char* where);

} // namespace rps
