#include "rps/unconstrained.hpp"
#include "rps/errors.hpp"
#include "time_stepping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rps {

namespace {

void check_params(const ModelParams& p) {
    if (!(p.eta > 0.0) || !(p.rho > 0.0) || !(p.h > 0.0))
        throw ConfigError("model parameters eta, h, rho must be positive");
}

// dy/dt = c (S_{+k} y + S_{-k} y - 2 y), zero beyond the domain.
void shift_stencil(const std::vector<double>& y, std::vector<double>& out, int k, double c) {
    const int n = static_cast<int>(y.size());
    for (int i = 0; i < n; ++i) {
        const double up = (i + k < n) ? y[static_cast<size_t>(i + k)] : 0.0;
        const double dn = (i - k >= 0) ? y[static_cast<size_t>(i - k)] : 0.0;
        out[static_cast<size_t>(i)] = c * (up + dn - 2.0 * y[static_cast<size_t>(i)]);
    }
}

double stability_cap(const ModelParams& p) {
    // operator norm <= 4 eta rho / 3; keep half of that budget
    return 0.5 * 3.0 / (4.0 * p.eta * p.rho);
}

// Poisson tail P(K > j_max) for intensity z; the neglected lattice weight
// beyond |j| = j_max is bounded by it.
bool poisson_tail_small(double z, int j_max, double tol) {
    if (z <= 0.0) return true;
    double term = std::exp(-z);
    double cum = term;
    for (int k = 1; k <= j_max; ++k) {
        term *= z / k;
        cum += term;
    }
    return (1.0 - cum) < tol;
}

} // namespace

DensityField rhs_unconstrained(const DensityField& field, const ModelParams& params) {
    check_params(params);
    const int k = shift_cells(field.grid, params.h);
    DensityField out = zero_field(field.grid);
    out.time = field.time;
    shift_stencil(field.values, out.values, k, params.eta * params.rho / 3.0);
    return out;
}

Trajectory solve_unconstrained(const DensityField& f_in, const ModelParams& params,
                               double t_end, double dt,
                               std::span<const double> output_times) {
    check_params(params);
    require_finite(f_in, "solve_unconstrained");
    const int k = shift_cells(f_in.grid, params.h);
    const double cap = stability_cap(params);
    if (!(dt > 0.0) || dt > cap * (1.0 + 1e-12))
        throw NumericalError("solve_unconstrained: dt exceeds the stability cap 3/(8 eta rho) = " +
                             std::to_string(cap));
    const std::vector<double> times = detail::resolve_output_times(output_times, t_end);
    const double c = params.eta * params.rho / 3.0;

    std::vector<double> y = f_in.values;
    detail::Rk4Scratch scratch;
    scratch.resize(y.size());
    auto rhs = [&](const std::vector<double>& in, std::vector<double>& out) {
        shift_stencil(in, out, k, c);
    };

    Trajectory traj;
    traj.reserve(times.size());
    double t = 0.0;
    for (double target : times) {
        const int m = detail::substep_count(target - t, dt);
        if (m > 0) {
            const double step = (target - t) / m;
            for (int s = 0; s < m; ++s)
                detail::rk4_step(y, step, rhs, scratch);
        }
        t = target;
        DensityField snap = field_from_values(f_in.grid, y, t);
        require_finite(snap, "solve_unconstrained");
        traj.push_back(std::move(snap));
    }
    return traj;
}

double LatticeMeasure::total() const {
    double s = 0.0;
    for (int j = 1; j <= j_max(); ++j) s += 2.0 * weights[static_cast<size_t>(j)];
    return s + (weights.empty() ? 0.0 : weights[0]);
}

LatticeMeasure fundamental_solution(double t, const ModelParams& params, int j_max) {
    check_params(params);
    if (t < 0.0 || !std::isfinite(t))
        throw std::invalid_argument("fundamental_solution: t must be finite and >= 0");
    if (j_max < 0)
        throw std::invalid_argument("fundamental_solution: j_max must be >= 0");
    const double z = 2.0 * params.rho * params.eta * t / 3.0;
    if (!poisson_tail_small(z, j_max, 1e-14))
        throw std::invalid_argument("fundamental_solution: j_max too small for the 1e-14 tail bound");

    LatticeMeasure F;
    F.spacing = params.h;
    F.time = t;
    F.weights.assign(static_cast<size_t>(j_max) + 1, 0.0);
    if (z == 0.0) {
        F.weights[0] = 1.0;
        return F;
    }
    // scaled series exp(-z) I_j(z) = sum_m exp(-z) (z/2)^(2m+j) / (m! (m+j)!)
    const double log_half_z = std::log(0.5 * z);
    for (int j = 0; j <= j_max; ++j) {
        double term = std::exp(j * log_half_z - std::lgamma(j + 1.0) - z);
        double sum = term;
        const double q = 0.25 * z * z;
        for (int m = 0; m < 1000000; ++m) {
            term *= q / ((m + 1.0) * (m + 1.0 + j));
            sum += term;
            if (term < 1e-18 * (sum + 1e-300)) break;
        }
        F.weights[static_cast<size_t>(j)] = sum;
    }
    return F;
}

LatticeMeasure fundamental_solution_series(double t, const ModelParams& params, int j_max) {
    check_params(params);
    if (t < 0.0 || !std::isfinite(t))
        throw std::invalid_argument("fundamental_solution_series: t must be finite and >= 0");
    if (j_max < 0)
        throw std::invalid_argument("fundamental_solution_series: j_max must be >= 0");
    const double z = 2.0 * params.rho * params.eta * t / 3.0;
    if (!poisson_tail_small(z, j_max, 1e-14))
        throw std::invalid_argument("fundamental_solution_series: j_max too small for the 1e-14 tail bound");

    LatticeMeasure F;
    F.spacing = params.h;
    F.time = t;
    F.weights.assign(static_cast<size_t>(j_max) + 1, 0.0);
    // Layer k deposits exp(-z) q^k/k! C(k,i) at offset 2i-k, q = eta rho t / 3.
    // The binomial row is symmetric in i <-> k-i, so offsets come in +/- pairs;
    // only the non-negative side is stored.
    const double q = params.eta * params.rho * t / 3.0;
    double layer = std::exp(-z); // exp(-z) q^k / k!
    for (int k = 0; k <= j_max; ++k) {
        double term = layer; // layer * C(k,i), built incrementally in i
        for (int i = 0; i <= k; ++i) {
            const int off = 2 * i - k;
            if (off >= 0)
                F.weights[static_cast<size_t>(off)] += term;
            if (i < k) term *= static_cast<double>(k - i) / (i + 1.0);
        }
        layer *= q / (k + 1.0);
    }
    return F;
}

DensityField lattice_convolve(const LatticeMeasure& F, const DensityField& f_in) {
    const int k = shift_cells(f_in.grid, F.spacing);
    const int n = f_in.grid.n_cells;
    DensityField out = zero_field(f_in.grid);
    out.time = f_in.time + F.time;
    for (int j = -F.j_max(); j <= F.j_max(); ++j) {
        const double w = F.weight(j);
        if (w == 0.0) continue;
        const int shift = j * k;
        for (int i = 0; i < n; ++i) {
            const int src = i - shift;
            if (src >= 0 && src < n)
                out.values[static_cast<size_t>(i)] += w * f_in.values[static_cast<size_t>(src)];
        }
    }
    return out;
}

namespace {

// In-place iterative radix-2 FFT; falls back to the direct transform when the
// size is not a power of two.
bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

void dft_naive(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    std::vector<std::complex<double>> out(n);
    const double sgn = inverse ? 2.0 : -2.0;
    for (size_t m = 0; m < n; ++m) {
        std::complex<double> s(0.0, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double ang = sgn * std::numbers::pi * static_cast<double>((m * i) % n) / static_cast<double>(n);
            s += a[i] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[m] = inverse ? s / static_cast<double>(n) : s;
    }
    a = std::move(out);
}

void transform(std::vector<std::complex<double>>& a, bool inverse) {
    if (is_pow2(a.size()))
        fft_pow2(a, inverse);
    else
        dft_naive(a, inverse);
}

} // namespace

SpectralField spectral_transform(const DensityField& field) {
    const int n = field.grid.n_cells;
    std::vector<std::complex<double>> a(field.values.begin(), field.values.end());
    transform(a, false);
    SpectralField s;
    s.time = field.time;
    s.frequencies.resize(static_cast<size_t>(n));
    s.amplitudes.resize(static_cast<size_t>(n));
    const double length = field.grid.length();
    for (int m = 0; m < n; ++m) {
        const int signed_m = (m <= n / 2) ? m : m - n;
        const double xi = 2.0 * std::numbers::pi * signed_m / length;
        s.frequencies[static_cast<size_t>(m)] = xi;
        // include dx and the phase of the first cell center so that the zero
        // mode equals the mass and amplitudes match sum f_i exp(-i xi x_i) dx
        const double phase = -xi * field.grid.center(0);
        s.amplitudes[static_cast<size_t>(m)] =
            a[static_cast<size_t>(m)] * field.grid.dx * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return s;
}

DensityField spectral_solve(const DensityField& f_in, double t, const ModelParams& params) {
    check_params(params);
    require_finite(f_in, "spectral_solve");
    const int k = shift_cells(f_in.grid, params.h);
    const int n = f_in.grid.n_cells;
    if (t < 0.0 || !std::isfinite(t))
        throw std::invalid_argument("spectral_solve: t must be finite and >= 0");

    std::vector<std::complex<double>> a(f_in.values.begin(), f_in.values.end());
    transform(a, false);
    const double c = 2.0 * params.rho * params.eta / 3.0;
    for (int m = 0; m < n; ++m) {
        // h*xi_m = 2 pi k m / n exactly on the aligned grid
        const long long r = (static_cast<long long>(k) * m) % n;
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / n;
        const double mult = std::exp(c * (std::cos(angle) - 1.0) * t);
        a[static_cast<size_t>(m)] *= mult;
    }
    transform(a, true);
    DensityField out = zero_field(f_in.grid);
    out.time = f_in.time + t;
    for (int i = 0; i < n; ++i)
        out.values[static_cast<size_t>(i)] = a[static_cast<size_t>(i)].real();
    return out;
}

EnergyDecayReport energy_decay_fit(const Trajectory& trajectory, double t_lo, double t_hi) {
    if (trajectory.size() < 3)
        throw std::invalid_argument("energy_decay_fit: need at least 3 samples");
    EnergyDecayReport r;
    r.times.reserve(trajectory.size());
    r.energies.reserve(trajectory.size());
    for (const DensityField& f : trajectory) {
        r.times.push_back(f.time);
        r.energies.push_back(energy(f));
    }
    for (size_t i = 1; i < r.energies.size(); ++i)
        if (r.energies[i] > r.energies[i - 1] * (1.0 + 1e-12))
            r.monotone = false;

    if (t_hi <= 0.0) {
        t_hi = r.times.back();
        t_lo = t_hi / 10.0;
    }
    if (!(t_lo > 0.0) || !(t_hi / t_lo >= 10.0 * (1.0 - 1e-9)))
        throw std::invalid_argument("energy_decay_fit: fit window must span at least one decade");
    r.fit_window = {t_lo, t_hi};

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = 0; i < r.times.size(); ++i) {
        const double t = r.times[i];
        if (t < t_lo * (1.0 - 1e-12) || t > t_hi * (1.0 + 1e-12)) continue;
        if (!(r.energies[i] > 0.0)) continue;
        const double x = std::log(t);
        const double y = std::log(r.energies[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    if (m < 3)
        throw std::invalid_argument("energy_decay_fit: fewer than 3 usable samples in the window");
    const double denom = m * sxx - sx * sx;
    r.fitted_slope = (m * sxy - sx * sy) / denom;
    r.fit_intercept = (sy - r.fitted_slope * sx) / m;
    double ss = 0.0;
    for (size_t i = 0; i < r.times.size(); ++i) {
        const double t = r.times[i];
        if (t < t_lo * (1.0 - 1e-12) || t > t_hi * (1.0 + 1e-12) || !(r.energies[i] > 0.0)) continue;
        const double pred = r.fit_intercept + r.fitted_slope * std::log(t);
        const double res = std::log(r.energies[i]) - pred;
        ss += res * res;
    }
    r.fit_residual = std::sqrt(ss / m);
    return r;
}

} // namespace rps
