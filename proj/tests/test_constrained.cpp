#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rps/constrained.hpp"
#include "rps/errors.hpp"
#include "rps/grid.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace rps;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

} // namespace

TEST_CASE("tail masses of the unit indicator") {
    const Grid1D g = make_grid(0.0, 2.0, 64); // dx = 0.03125, h = 8 dx
    const DensityField f = indicator_field(g, 0.0, 1.0);
    const TailMasses tm = tail_masses(f, 0.25, 6);
    const double expected[5] = {1.0, 0.75, 0.5, 0.25, 0.0};
    for (int k = 0; k <= 4; ++k)
        CHECK(tm.betas[static_cast<size_t>(k)] == doctest::Approx(expected[k]).epsilon(1e-13));
    CHECK(tm.betas[5] == 0.0);
    CHECK(tm.betas[6] == 0.0);

    const TailMasses zero = tail_masses(zero_field(g), 0.25, 4);
    for (double b : zero.betas) CHECK(b == 0.0);
}

TEST_CASE("tail masses are bounded by the first moment") {
    const Grid1D g = make_grid(0.0, 4.0, 128);
    DensityField f = field_from_values(g, oracles::random_values(g.n_cells, 77, 0.0, 1.0));
    const double h = 0.25;
    const TailMasses tm = tail_masses(f, h, 16);
    double total = 0.0;
    for (size_t k = 1; k < tm.betas.size(); ++k) total += tm.betas[k];
    CHECK(total <= first_moment(f) / h + 1e-10);
}

TEST_CASE("rhs vanishes in the frozen state") {
    const Grid1D g = make_grid(0.0, 2.0, 64);
    ModelParams p{3.0, 1.0, 0.5, true};
    const DensityField f = indicator_field(g, 0.0, 0.5); // all mass below h = 1
    const DensityField r = rhs_constrained(f, p);
    for (double v : r.values) CHECK(v == 0.0);
}

TEST_CASE("rhs conserves mass and first moment (gated telescoping)") {
    const Grid1D g = make_grid(0.0, 8.0, 256); // dx = 0.03125
    ModelParams p{3.0, 0.25, 1.0, true};
    DensityField f = zero_field(g);
    const auto vals = oracles::random_values(128, 11, 0.0, 2.0);
    for (int i = 0; i < 128; ++i) f.values[static_cast<size_t>(16 + i)] = vals[static_cast<size_t>(i)];
    const DensityField r = rhs_constrained(f, p);
    double m0 = 0.0, m1 = 0.0;
    for (int i = 0; i < g.n_cells; ++i) {
        m0 += r.values[static_cast<size_t>(i)];
        m1 += r.values[static_cast<size_t>(i)] * g.center(i);
    }
    CHECK(std::abs(m0 * g.dx) < 1e-13);
    CHECK(std::abs(m1 * g.dx) < 1e-12);
}

TEST_CASE("grid must start at zero") {
    const Grid1D g = make_grid(-1.0, 1.0, 64);
    ModelParams p{3.0, 0.25, 1.0, true};
    CHECK_THROWS_AS((void)rhs_constrained(indicator_field(g, 0.0, 0.5), p), ConfigError);
}

TEST_CASE("beta lower bound closed form") {
    CHECK(beta_lower_bound(0.75, 3.0, 0.0) == 0.75);
    CHECK(beta_lower_bound(1.0, 3.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(beta_lower_bound(0.0, 3.0, 7.0) == 0.0);
    CHECK_THROWS_AS((void)beta_lower_bound(-0.1, 3.0, 1.0), std::invalid_argument);
}

TEST_CASE("split field") {
    const Grid1D g = make_grid(0.0, 2.0, 64);
    const DensityField f = indicator_field(g, 0.0, 1.0);
    const SplitField s = split_field(f, 0.5);
    CHECK(s.f_minus_mass == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(mass(s.f_plus) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(s.f_minus_mass + mass(s.f_plus) == doctest::Approx(mass(f)).epsilon(1e-14));

    const SplitField below = split_field(indicator_field(g, 1.0, 1.5), 0.5);
    CHECK(below.f_minus_mass == 0.0);

    CHECK_THROWS_AS((void)split_field(f, 0.51), std::invalid_argument);
}

TEST_CASE("constrained run: monotone beta, lower bound, concentration") {
    const Grid1D g = make_grid(0.0, 9.6, 256); // dx = 0.0375 = 0.3 / 8
    ModelParams p{3.0, 0.3, 1.0, true};
    const DensityField f0 = indicator_field(g, 0.0, 1.0);
    const Trajectory traj = solve_constrained(f0, p, 4.0, 0.05, linspace(0.0, 4.0, 21));

    double prev_beta = 1e300, prev_below = -1.0;
    const double beta0 = tail_masses(traj.front(), p.h, 1).betas[1];
    const double fm0 = first_moment(traj.front()); // support edge straddles a cell
    for (const DensityField& f : traj) {
        const TailMasses tm = tail_masses(f, p.h, 4);
        const double beta = tm.betas[1];
        CHECK(beta <= prev_beta + 1e-12);
        CHECK(beta >= beta_lower_bound(beta0, p.eta, f.time) - 1e-8);
        for (size_t k = 0; k + 1 < tm.betas.size(); ++k)
            CHECK(tm.betas[k] >= tm.betas[k + 1] - 1e-12);
        prev_beta = beta;

        double below = 0.0;
        for (int i = 0; i < g.n_cells; ++i)
            if (g.center(i) < p.h) below += f.values[static_cast<size_t>(i)];
        below *= g.dx;
        CHECK(below >= prev_below - 1e-12);
        prev_below = below;

        CHECK(std::abs(mass(f) - 1.0) <= 1e-10);
        CHECK(std::abs(first_moment(f) - fm0) <= 1e-9);
        CHECK(min_value(f) >= -1e-12);
    }
}

TEST_CASE("tail sup-norm bound") {
    const Grid1D g = make_grid(0.0, 9.0, 288);
    ModelParams p{3.0, 0.25, 1.0, true};
    const DensityField f0 = indicator_field(g, 0.0, 1.0);
    const Trajectory traj = solve_constrained(f0, p, 5.0, 0.1, linspace(0.0, 5.0, 11));
    double cap = 0.0;
    for (int i = 0; i < g.n_cells; ++i)
        if (g.center(i) > p.h) cap = std::max(cap, f0.values[static_cast<size_t>(i)]);
    for (const DensityField& f : traj) {
        double tail_max = 0.0;
        for (int i = 0; i < g.n_cells; ++i)
            if (g.center(i) > p.h) tail_max = std::max(tail_max, f.values[static_cast<size_t>(i)]);
        CHECK(tail_max <= cap + 1e-10);
    }
}

TEST_CASE("beta derivative identity") {
    const Grid1D g = make_grid(0.0, 6.0, 192);
    ModelParams p{3.0, 0.25, 1.0, true};
    const DensityField f0 = indicator_field(g, 0.0, 1.0);

    SUBCASE("frozen state gives zero residual") {
        ModelParams frozen{3.0, 2.0, 0.5, true};
        const Grid1D gf = make_grid(0.0, 6.0, 96); // dx = 0.0625, h = 32 dx
        const DensityField u0 = indicator_field(gf, 0.0, 1.0);
        // all mass below h = 2: nothing moves
        const Trajectory traj = solve_constrained(u0, frozen, 1.0, 0.05, linspace(0.0, 1.0, 11));
        CHECK(beta_derivative_check(traj, frozen) <= 1e-12);
    }

    SUBCASE("second-order decay under dt halving (Richardson)") {
        auto residual_at = [&](double dt) {
            std::vector<double> times;
            const int samples = static_cast<int>(std::lround(2.0 / (10.0 * dt)));
            for (int i = 0; i <= samples; ++i) times.push_back(10.0 * dt * i);
            const Trajectory traj = solve_constrained(f0, p, times.back(), dt, times);
            return beta_derivative_check(traj, p);
        };
        const double r1 = residual_at(1e-3);
        const double r2 = residual_at(5e-4);
        const double ratio = r1 / r2;
        MESSAGE("residuals ", r1, " / ", r2, " ratio ", ratio);
        CHECK(ratio >= 3.5);
        CHECK(ratio <= 4.5);
    }

    SUBCASE("non-uniform sampling is rejected") {
        const Trajectory traj =
            solve_constrained(f0, p, 1.0, 0.01, std::vector<double>{0.0, 0.3, 1.0});
        CHECK_THROWS_AS((void)beta_derivative_check(traj, p), std::invalid_argument);
    }

    SUBCASE("beta decreases at every sample") {
        const Trajectory traj = solve_constrained(f0, p, 2.0, 0.01, linspace(0.0, 2.0, 201));
        std::vector<double> beta;
        for (const DensityField& f : traj) beta.push_back(tail_masses(f, p.h, 1).betas[1]);
        for (size_t i = 1; i + 1 < beta.size(); ++i)
            CHECK((beta[i + 1] - beta[i - 1]) / (2.0 * (traj[1].time - traj[0].time)) <= 1e-10);
    }
}

TEST_CASE("long-horizon tail decay matches the closed tail-mass ODE system") {
    // The tail masses obey an exactly closed ODE hierarchy:
    //   d beta_1/dt = -(eta/3) beta_1 (beta_1 - beta_2)
    //   d beta_k/dt = (eta/3) beta_1 (beta_{k-1} + beta_{k+1} - 2 beta_k), k >= 2
    // Integrating it directly gives a solver-independent value of beta(T).
    const double eta = 3.0, h = 0.25, T = 50.0;
    const int K = 400;
    std::vector<double> b(static_cast<size_t>(K) + 2, 0.0);
    for (int k = 0; k < K + 2; ++k) b[static_cast<size_t>(k)] = std::max(0.0, 1.0 - k * h);
    auto rhs = [&](const std::vector<double>& u, std::vector<double>& d) {
        d.assign(u.size(), 0.0);
        d[1] = -eta / 3.0 * u[1] * (u[1] - u[2]);
        for (int k = 2; k <= K; ++k)
            d[static_cast<size_t>(k)] = eta / 3.0 * u[1] *
                                        (u[static_cast<size_t>(k - 1)] + u[static_cast<size_t>(k + 1)] -
                                         2.0 * u[static_cast<size_t>(k)]);
    };
    const double dt = 0.002;
    std::vector<double> k1, k2, k3, k4, tmp(b.size());
    const int steps = static_cast<int>(std::lround(T / dt));
    for (int s = 0; s < steps; ++s) {
        rhs(b, k1);
        for (size_t i = 0; i < b.size(); ++i) tmp[i] = b[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (size_t i = 0; i < b.size(); ++i) tmp[i] = b[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (size_t i = 0; i < b.size(); ++i) tmp[i] = b[i] + dt * k3[i];
        rhs(tmp, k4);
        for (size_t i = 0; i < b.size(); ++i)
            b[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    const double oracle_beta50 = b[1];
    CHECK(oracle_beta50 == doctest::Approx(0.21142013).epsilon(1e-6)); // frozen from this oracle

    ModelParams p{eta, h, 1.0, true};
    const Grid1D g = make_grid(0.0, 9.0, 288);
    const Trajectory traj =
        solve_constrained(indicator_field(g, 0.0, 1.0), p, T, 0.1, linspace(0.0, T, 11));
    const double solver_beta50 = tail_masses(traj.back(), h, 1).betas[1];
    CHECK(solver_beta50 == doctest::Approx(oracle_beta50).epsilon(1e-4));
}

TEST_CASE("negative initial data is rejected") {
    const Grid1D g = make_grid(0.0, 2.0, 64);
    ModelParams p{3.0, 0.25, 1.0, true};
    DensityField f = indicator_field(g, 0.0, 1.0);
    f.values[3] = -0.2;
    CHECK_THROWS_AS((void)solve_constrained(f, p, 1.0, 0.05, {}), std::invalid_argument);
}
