"""Smoke tests for the rps_kinetics Python extension."""

import math
import sys
import tempfile

import rps_kinetics as rk


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def test_grid_layer():
    g = rk.make_grid(0.0, 1.0, 100)
    f = rk.indicator_field(g, 0.0, 1.0)
    approx(rk.mass(f), 1.0, 1e-14)
    approx(rk.first_moment(f), 0.5, 1e-12)
    approx(rk.energy(f), 0.5, 1e-13)
    try:
        rk.make_grid(0.0, 1.0, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("n_cells = 1 must be rejected")


def test_payoff_table():
    out = rk.play_round(0, 1, 0.5)
    assert out.delta_a == 0.5 and out.delta_b == -0.5
    out = rk.play_round(0, 2, 0.5)
    assert out.delta_a == -0.5 and out.delta_b == 0.5
    out = rk.play_round(2, 2, 0.5)
    assert out.delta_a == 0.0 and out.delta_b == 0.0


def test_unconstrained_solver():
    g = rk.make_grid(-8.0, 9.0, 544)
    p = rk.ModelParams(eta=3.0, h=0.25, rho=1.0)
    f0 = rk.indicator_field(g, 0.0, 1.0)
    traj = rk.solve_unconstrained(f0, p, 2.0, 0.1, [0.0, 1.0, 2.0])
    assert len(traj) == 3
    for f in traj:
        approx(rk.mass(f), 1.0, 1e-10)
        approx(rk.first_moment(f), 0.5, 1e-9)
    # closed-form fundamental solution: w0(z=1) = exp(-1) I0(1)
    F = rk.fundamental_solution(0.5, p, 40)
    approx(F.weight(0), 0.46575960774, 1e-9)
    S = rk.fundamental_solution_series(0.5, p, 40)
    assert max(abs(F.weight(j) - S.weight(j)) for j in range(41)) < 1e-12


def test_constrained_solver():
    g = rk.make_grid(0.0, 6.0, 192)
    p = rk.ModelParams(eta=3.0, h=0.25, rho=1.0, constrained=True)
    f0 = rk.indicator_field(g, 0.0, 1.0)
    traj = rk.solve_constrained(f0, p, 2.0, 0.05, [0.0, 0.5, 1.0, 2.0])
    betas = [rk.tail_masses(f, 0.25, 1).betas[1] for f in traj]
    assert all(b2 <= b1 + 1e-12 for b1, b2 in zip(betas, betas[1:]))
    lower = rk.beta_lower_bound(betas[0], 3.0, 2.0)
    assert betas[-1] >= lower - 1e-8
    s = rk.split_field(traj[-1], 0.25)
    approx(s.f_minus_mass + rk.mass(s.f_plus), 1.0, 1e-10)


def test_game_population():
    p = rk.ModelParams(eta=3.0, h=0.5, rho=1.0)
    pop = rk.AgentPopulation.sample_uniform(5000, 0.0, 1.0, 1.0, 0.5, 42)
    total0 = pop.total_wealth()
    for step in range(20):
        pop = rk.step_population(pop, p, 0.02, 1000 + step)
        assert pop.total_wealth() == total0
    g = rk.make_grid(-4.0, 5.0, 144)
    hist = rk.histogram(pop, g)
    approx(rk.mass(hist), 1.0, 1e-10)


def test_limit_models():
    g = rk.make_grid(-10.0, 11.0, 1050)
    f0 = rk.indicator_field(g, 0.0, 1.0)
    out = rk.solve_heat(f0, 1.0, 0.5)
    approx(rk.mass(out), 1.0, 1e-10)
    # erf closed form near the midpoint of the initial block
    mid = min(range(g.n_cells), key=lambda i: abs(g.center(i) - 0.5))
    x = g.center(mid)
    expect = 0.5 * (math.erf(x / math.sqrt(2.0)) - math.erf((x - 1.0) / math.sqrt(2.0)))
    approx(out.values[mid], expect, 1e-8)

    gn = rk.make_grid(0.0, 8.0, 400)
    f0 = rk.indicator_field(rk.make_grid(-gn.dx / 2, 8.0 - gn.dx / 2, 400), 1.0, 2.0)
    f0 = rk.field_from_values(gn, f0.values)
    rep = rk.solve_nonlocal_diffusion(f0, 3.0, 0.3, 5e-5, [0.0, 0.1, 0.3])
    masses = rep.mass_series
    assert all(m2 <= m1 + 1e-12 for m1, m2 in zip(masses, masses[1:]))
    assert all(f.values[0] == 0.0 for f in rep.trajectory)
    ora = rk.reparametrized_oracle(f0, 3.0, 0.3, [0.3])
    d = rk.l1_distance(rep.trajectory[-1], ora.trajectory[-1])
    assert d < 1e-3, d


def test_harness_run():
    cfg = rk.parse_config_text(
        "model = unconstrained\n"
        "eta = 3\n"
        "h = 0.25\n"
        "grid.x_min = -4\n"
        "grid.x_max = 5\n"
        "grid.n_cells = 288\n"
        "dt = 0.1\n"
        "t_end = 1\n"
        "init = indicator(0,1)\n"
    )
    with tempfile.TemporaryDirectory() as tmp:
        result = rk.run_single(cfg, tmp)
        assert result["invariants_pass"], result["invariants"]
        rechecked = rk.check_invariants(tmp)
        assert rechecked and all(ok for _, ok, _, _ in rechecked)


def test_harness_sweep():
    cfg = rk.parse_config_text(
        "model = unconstrained\n"
        "eta = 3\n"
        "grid.x_min = -8\n"
        "grid.x_max = 9\n"
        "t_end = 0.5\n"
        "init = indicator(0,1)\n"
        "sweep.eps_list = 0.4,0.2\n"
        "sweep.alignment = 4\n"
    )
    with tempfile.TemporaryDirectory() as tmp:
        rep = rk.epsilon_sweep(cfg, tmp, 2)
        assert rep["errors"][1] < rep["errors"][0]


def main():
    tests = [
        test_grid_layer,
        test_payoff_table,
        test_unconstrained_solver,
        test_constrained_solver,
        test_game_population,
        test_limit_models,
        test_harness_run,
        test_harness_sweep,
    ]
    for t in tests:
        t()
        print(f"ok {t.__name__}")
    print(f"{len(tests)} python smoke tests passed ({rk.__version__})")


if __name__ == "__main__":
    sys.exit(main())
