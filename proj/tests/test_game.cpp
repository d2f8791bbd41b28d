#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rps/errors.hpp"
#include "rps/game.hpp"
#include "rps/grid.hpp"
#include "rps/rng.hpp"
#include "rps/unconstrained.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace rps;

TEST_CASE("payoff table") {
    const double h = 0.7;
    // row = a's choice, column = b's choice
    const double expected[3][3] = {{0, +h, -h}, {-h, 0, +h}, {+h, -h, 0}};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const GameOutcome out = play_round(a, b, h);
            CHECK(out.delta_a == expected[a][b]);
            CHECK(out.delta_b == -expected[a][b]);
            CHECK(out.delta_a + out.delta_b == 0.0);
        }
    CHECK_THROWS_AS(play_round(3, 0, h), std::invalid_argument);
    CHECK_THROWS_AS(play_round(0, -1, h), std::invalid_argument);
    CHECK_THROWS_AS(play_round(0, 1, 0.0), std::invalid_argument);
}

TEST_CASE("zero-sum conservation is bit-exact") {
    ModelParams p{3.0, 0.5, 1.0, false};
    AgentPopulation pop = AgentPopulation::sample_uniform(400, 0.0, 1.0, 1.0, p.h, 7);
    const double total0 = pop.total_wealth();
    for (int s = 0; s < 200; ++s) {
        pop = step_population(pop, p, 0.02, rng::mix_seed(99, static_cast<uint64_t>(s)));
        CHECK(pop.total_wealth() == total0);
        CHECK(pop.total_net_wins() == 0);
    }
}

TEST_CASE("constrained population below the wager is frozen") {
    ModelParams p{3.0, 1.0, 1.0, true};
    std::vector<double> w(100, 0.5);
    AgentPopulation pop(std::move(w), 1.0, p.h);
    for (int s = 0; s < 50; ++s) {
        pop = step_population(pop, p, 0.03, rng::mix_seed(3, static_cast<uint64_t>(s)));
        for (int i = 0; i < pop.size(); ++i) CHECK(pop.wealth(i) == 0.5);
    }
}

TEST_CASE("per-agent jump rates match eta*rho/3") {
    // two agents, so the opponent draw is forced; count +h transfer events of
    // agent 0 in both roles against the binomial oracle with p = eta rho dt/3
    const double eta = 3.0, rho = 1.0;
    const double dt = 1.0 / 150.0; // eta rho dt = 0.02
    ModelParams p{eta, 0.25, rho, false};
    AgentPopulation pop(std::vector<double>{1.0, 1.0}, rho, p.h);
    const long steps = 7'500'000; // ~1e5 events in total
    long long up_events = 0, down_events = 0;
    long long prev = 0;
    for (long s = 0; s < steps; ++s) {
        pop = step_population(pop, p, dt, rng::mix_seed(1234, static_cast<uint64_t>(s)));
        const long long d = pop.net_wins(0) - prev;
        if (d > 0) up_events += d;
        if (d < 0) down_events -= d;
        prev = pop.net_wins(0);
    }
    const double p_dir = eta * rho * dt / 3.0;
    const double expected = static_cast<double>(steps) * p_dir;
    const double sigma = oracles::binomial_sigma(static_cast<double>(steps), p_dir);
    CHECK(std::abs(static_cast<double>(up_events) - expected) <= 3.0 * sigma);
    CHECK(std::abs(static_cast<double>(down_events) - expected) <= 3.0 * sigma);
    // empirical per-unit-time rate, for the log
    const double rate = static_cast<double>(up_events) / (static_cast<double>(steps) * dt);
    MESSAGE("measured +h rate ", rate, " vs eta*rho/3 = ", eta * rho / 3.0);
}

TEST_CASE("determinism in (pop, params, dt, seed)") {
    ModelParams p{3.0, 0.5, 1.0, false};
    const AgentPopulation pop = AgentPopulation::sample_uniform(100, 0.0, 1.0, 1.0, p.h, 11);
    const AgentPopulation a = step_population(pop, p, 0.02, 42);
    const AgentPopulation b = step_population(pop, p, 0.02, 42);
    for (int i = 0; i < pop.size(); ++i) CHECK(a.wealth(i) == b.wealth(i));
    // a different seed must give a different population
    const AgentPopulation c = step_population(pop, p, 0.02, 43);
    bool any_diff = false;
    for (int i = 0; i < pop.size(); ++i) any_diff |= (a.wealth(i) != c.wealth(i));
    CHECK(any_diff);
}

TEST_CASE("constrained gating never drives wealth negative") {
    ModelParams p{3.0, 0.25, 1.0, true};
    AgentPopulation pop = AgentPopulation::sample_uniform(500, 0.0, 1.0, 1.0, p.h, 5);
    REQUIRE(pop.min_wealth() >= 0.0);
    for (int s = 0; s < 400; ++s) {
        pop = step_population(pop, p, 0.03, rng::mix_seed(17, static_cast<uint64_t>(s)));
        CHECK(pop.min_wealth() >= 0.0);
    }
}

TEST_CASE("histogram") {
    const Grid1D g = make_grid(0.0, 1.0, 2);
    std::vector<double> w(50, 0.5);
    AgentPopulation pop(std::move(w), 1.0, 0.25);
    const DensityField f = histogram(pop, g);
    CHECK(f.values[0] == 0.0);        // cell [0, 0.5)
    CHECK(f.values[1] == doctest::Approx(2.0)); // rho / 0.5
    CHECK(mass(f) == doctest::Approx(1.0).epsilon(1e-13));

    std::vector<double> out(50, 0.5);
    out[0] = 1.5;
    AgentPopulation bad(std::move(out), 1.0, 0.25);
    CHECK_THROWS_AS((void)histogram(bad, g), std::invalid_argument);
}

TEST_CASE("histogram sampling error against the binomial oracle") {
    const Grid1D g = make_grid(0.0, 1.0, 20); // dx = 0.05
    AgentPopulation pop = AgentPopulation::sample_uniform(1'000'000, 0.0, 1.0, 1.0, 0.25, 2024);
    const DensityField hist = histogram(pop, g);
    const DensityField exact = indicator_field(g, 0.0, 1.0);
    // expected l1 about sqrt(dx/N) * n_cells ~ 4e-3
    CHECK(l1_distance(hist, exact) <= 0.01);
    CHECK(mass(hist) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frozen constrained population keeps its histogram") {
    ModelParams p{3.0, 0.5, 1.0, true};
    std::vector<double> w(2000, 0.3); // everyone below the wager
    AgentPopulation pop(std::move(w), 1.0, p.h);
    const Grid1D g = make_grid(0.0, 1.0, 10);
    const DensityField before = histogram(pop, g);
    for (int s = 0; s < 60; ++s)
        pop = step_population(pop, p, 0.02, rng::mix_seed(8, static_cast<uint64_t>(s)));
    const DensityField after = histogram(pop, g);
    CHECK(l1_distance(before, after) == 0.0);
}

TEST_CASE("doubling N shrinks the sampling error like sqrt(2)") {
    // Monte Carlo scaling oracle: the histogram error against the smooth
    // limit scales as 1/sqrt(N), so doubling N gains a factor sqrt(2) on
    // average across seeds.
    ModelParams p{3.0, 0.5, 1.0, false};
    const Grid1D g = make_grid(-5.0, 6.0, 88);
    const DensityField f0 = indicator_field(g, 0.0, 1.0);
    const double t_end = 0.5, dt = 1.0 / 60.0;
    const Trajectory pde =
        solve_unconstrained(f0, p, t_end, 0.1, std::vector<double>{t_end});
    auto mean_l1 = [&](int n_agents) {
        double acc = 0.0;
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            AgentPopulation pop =
                AgentPopulation::sample_uniform(n_agents, 0.0, 1.0, 1.0, p.h, seed);
            const int steps = 30;
            for (int s = 0; s < steps; ++s)
                pop = step_population(pop, p, dt, rng::mix_seed(seed * 100 + s, 5));
            acc += l1_distance(histogram(pop, g), pde.back());
        }
        return acc / 10.0;
    };
    const double coarse = mean_l1(5000);
    const double fine = mean_l1(10000);
    const double ratio = coarse / fine;
    MESSAGE("mean l1 with N: ", coarse, " with 2N: ", fine, " ratio ", ratio);
    CHECK(ratio >= 1.15);
    CHECK(ratio <= 1.75);
}

TEST_CASE("population construction guards") {
    CHECK_THROWS_AS(AgentPopulation(std::vector<double>{1.0}, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(AgentPopulation(std::vector<double>{1.0, 2.0}, 1.0, -0.5), std::invalid_argument);
    ModelParams p{3.0, 0.5, 1.0, false};
    AgentPopulation pop(std::vector<double>{0.0, 1.0}, 1.0, 0.5);
    CHECK_THROWS_AS((void)step_population(pop, p, 0.2, 1), NumericalError); // eta rho dt > 0.1
    ModelParams mismatched{3.0, 0.25, 1.0, false};
    CHECK_THROWS_AS((void)step_population(pop, mismatched, 0.01, 1), std::invalid_argument);
}
