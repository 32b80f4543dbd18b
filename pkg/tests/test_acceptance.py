"""Acceptance suite: twelve end-to-end criteria, one pass/fail line each.

Run ``pytest tests/test_acceptance.py -v`` (lines are also repeated in the
terminal summary) or ``python3 tests/test_acceptance.py``.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from socialref.game import EquilibriumParams
from socialref.labor import (LaborEconomy, aggregate_effects, check_pairwise_stability,
                             comparative_statics_sorting, random_economy, solve_sorting,
                             sorting_fixed_point, sorting_grid_oracle, threshold_separated)
from socialref.linear_game import solve_linear
from socialref.mccall import (McCallProblem, default_problem, reservation_wage_exogenous,
                              uniform_offers, value_iteration_oracle)
from socialref.network import (bonacich, bonacich_neumann, erdos_renyi_row_normalized,
                               neumann_tail_bound, uncorrelated_centrality)
from socialref.nonlinear_game import (FixedPointConfig, action_upper_bound, comparative_static_alpha,
                                      comparative_static_cost, solve_nonlinear)
from socialref.portfolio import (PortfolioProblem, QuadraticParams, best_response_numeric,
                                 dara_comparative_static, lambda_closed_form)
from socialref.simulation import SimulationConfig, run_simulation, write_outputs
from socialref.utility import custom, make_utility

RESULTS = {}
SEED = 2024


def record(number, title, ok, detail, elapsed=None, limit=None):
    timing = ""
    if elapsed is not None:
        timing = f" [{elapsed:.1f}s" + (f" < {limit:g}s" if limit else "") + "]"
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}: {detail}{timing}"
    RESULTS[number] = line
    print(line)
    return ok


def instance(rng, n=None, alpha_max=0.8):
    n = int(rng.integers(5, 40)) if n is None else n
    net = erdos_renyi_row_normalized(n, rng.uniform(0.1, 0.6), seed=rng)
    return net, rng.uniform(0.0, alpha_max, n)


def test_c01_uncorrelated_identity():
    rng = np.random.default_rng(SEED + 1)
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(50):
        a = (k % 9 + 1) / 10
        net, _ = instance(rng)
        alpha = np.full(net.n, a)
        worst = max(worst, float(np.max(np.abs(bonacich(net, alpha).C_b - uncorrelated_centrality(alpha)))))
    el = time.perf_counter() - t0
    ok = worst <= 1e-9 and el < 5
    assert record(1, "uncorrelated identity", ok, f"max |C_b - formula| = {worst:.2e} (tol 1e-9)", el, 5)


def test_c02_neumann_oracle():
    rng = np.random.default_rng(SEED + 2)
    t0 = time.perf_counter()
    ratio = worst = 0.0
    for _ in range(50):
        net, alpha = instance(rng, alpha_max=0.8)
        cb = bonacich(net, alpha).C_b
        err = float(np.max(np.abs(cb - bonacich_neumann(net, alpha, 60))))
        # a few ulps of rounding on top of the truncation bound
        allowed = neumann_tail_bound(alpha, 60) + 64 * np.finfo(float).eps * float(cb.max())
        ratio = max(ratio, err / allowed)
        worst = max(worst, err)
    el = time.perf_counter() - t0
    ok = ratio <= 1.0 and el < 10
    assert record(2, "Neumann oracle K=60", ok,
                  f"max error {worst:.2e}, max error / (tail bound + rounding) = {ratio:.2e}", el, 10)


def test_c03_existence_boundary():
    rng = np.random.default_rng(SEED + 3)
    wrong = 0
    for k in range(1000):
        n = int(rng.integers(1, 30))
        target = rng.uniform(0.5, 1.5) if k % 10 else 1.0
        alpha = rng.dirichlet(np.ones(n)) * n * target  # mean == target up to rounding
        raised = False
        try:
            uncorrelated_centrality(alpha)
        except ValueError:
            raised = True
        wrong += raised != (alpha.mean() >= 1.0)
    ok = wrong == 0
    assert record(3, "existence iff mean alpha < 1", ok, f"{wrong} mismatches over 1000 profiles")


def test_c04_network_free():
    rng = np.random.default_rng(SEED + 4)
    params = EquilibriumParams(0.8, 0.1, make_utility("sqrt"))
    alpha = np.full(30, 0.45)
    sols = [solve_linear(erdos_renyi_row_normalized(30, rng.uniform(0.1, 0.7), seed=rng), alpha, params)
            for _ in range(10)]
    dx = max(float(np.max(np.abs(s.x_star - sols[0].x_star))) for s in sols)
    du = max(float(np.max(np.abs(s.u_star - sols[0].u_star))) for s in sols)
    ok = dx <= 1e-9 and du <= 1e-9
    assert record(4, "network-free outcomes", ok, f"max dx = {dx:.2e}, max du = {du:.2e} over 10 networks")


def test_c05_nonlinear_uniqueness():
    rng = np.random.default_rng(SEED + 5)
    curved = EquilibriumParams(1.0, 0.0, make_utility("sqrt", inner="log1p"))
    linear = EquilibriumParams(1.0, 0.0, make_utility("sqrt"))
    t0 = time.perf_counter()
    spread = gap = 0.0
    for _ in range(20):
        net, alpha = instance(rng, n=int(rng.integers(5, 25)))
        A = action_upper_bound(alpha, curved).A_hat
        xs = [solve_nonlinear(net, alpha, curved,
                              FixedPointConfig(tol=1e-12, x0=rng.uniform(0, A, net.n))).x_star for _ in range(5)]
        spread = max(spread, max(float(np.max(np.abs(x - xs[0]))) for x in xs))
        fp = solve_nonlinear(net, alpha, linear, FixedPointConfig(tol=1e-12)).x_star
        gap = max(gap, float(np.max(np.abs(fp - solve_linear(net, alpha, linear).x_star))))
    el = time.perf_counter() - t0
    ok = spread <= 1e-8 and gap <= 1e-6 and el < 30
    assert record(5, "nonlinear uniqueness and reduction", ok,
                  f"start spread = {spread:.2e} (tol 1e-8), identity vs closed form = {gap:.2e} (tol 1e-6)", el, 30)


def test_c06_comparative_statics():
    rng = np.random.default_rng(SEED + 6)
    curved = EquilibriumParams(1.0, 0.0, make_utility("sqrt", inner="log1p"))
    cfg = FixedPointConfig(tol=1e-12)
    alpha_ok = cost_ok = 0
    met = gains = 0
    for _ in range(50):
        net, alpha = instance(rng, n=int(rng.integers(5, 20)), alpha_max=0.8)
        j = int(rng.integers(net.n))
        alpha_ok += comparative_static_alpha(net, alpha, curved, j, rng.uniform(0.01, 0.15), cfg).holds
    for _ in range(50):
        net, alpha = instance(rng, n=int(rng.integers(5, 20)))
        rep = comparative_static_cost(net, alpha, curved, rng.uniform(0.01, 0.2), cfg)
        cost_ok += rep.x_strictly_down
        met += int(rep.condition_holds.sum())
        gains += int(np.sum(rep.du[rep.condition_holds] > 0))
    ok = alpha_ok == 50 and cost_ok == 50 and gains == met
    assert record(6, "comparative statics", ok,
                  f"alpha bump {alpha_ok}/50, cost raise {cost_ok}/50, "
                  f"sensitivity condition met by {met} agents ({gains} with du > 0)")


def test_c07_mccall():
    rng = np.random.default_rng(SEED + 7)
    t0 = time.perf_counter()
    vi_err = 0.0
    slopes_ok = True
    h = 1e-4
    for _ in range(20):
        prob = default_problem(rng.uniform(0.5, 0.99), 100.0, rng.uniform(0.1, 0.9))
        R = rng.uniform(0.0, 60.0)
        w0, w1 = reservation_wage_exogenous(prob, [R, R + h]).w_bar
        vi_err = max(vi_err, abs(w0 - value_iteration_oracle(prob, R, grid_size=100_000)))
        slopes_ok &= bool(0.0 < (w1 - w0) / h < 1.0)
    linear = custom(lambda z: np.asarray(z, dtype=float), lambda z: np.ones_like(np.asarray(z, dtype=float)),
                    lambda y: np.nan, name="linear")
    wq = reservation_wage_exogenous(McCallProblem(0.9, uniform_offers(100.0), linear), 0.0).w_bar[0]
    quad_root = min(np.roots([9.0, -2000.0, 90000.0]).real)
    el = time.perf_counter() - t0
    step = 100.0 / 100_000
    ok = vi_err <= step and abs(wq - quad_root) <= 1e-3 and slopes_ok and el < 60
    assert record(7, "McCall scalar solver", ok,
                  f"VI gap {vi_err:.2e} (step {step:g}), linear case {wq:.6f} vs {quad_root:.6f}, "
                  f"dw/dR in (0,1): {slopes_ok}", el, 60)


SIM = SimulationConfig(n_networks=100, seed=SEED)


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    t0 = time.perf_counter()
    res = run_simulation(SIM, workers=1)
    el = time.perf_counter() - t0
    out = tmp_path_factory.mktemp("sim") / "serial"
    write_outputs(res, out)
    return res, el, out


def test_c08_paper_simulation(default_run):
    res, el, _ = default_run
    r0 = res.fit_no_constant.r_squared_uncentered
    r1 = res.fit_constant.r_squared_uncentered
    c0 = ", ".join(f"{n}={b:.4f}" for n, b in zip(res.fit_no_constant.names, res.fit_no_constant.coefficients))
    c1 = ", ".join(f"{n}={b:.4f}" for n, b in zip(res.fit_constant.names, res.fit_constant.coefficients))
    print(f"    no constant: {c0}\n    with constant: {c1} "
          f"(centered R2 {res.fit_constant.r_squared_centered:.4f})")
    ok = r0 >= 0.98 and r1 > r0 and el < 300 and res.records.shape == (5000, 5)
    assert record(8, "simulation at desk scale", ok,
                  f"uncentered R2 no constant {r0:.5f} (>= 0.98), with constant {r1:.5f} (> no constant)",
                  el, 300)


def test_c09_portfolio():
    rng = np.random.default_rng(SEED + 9)
    t0 = time.perf_counter()
    gap = 0.0
    quad_inverted = 0
    for _ in range(20):
        quad = QuadraticParams(0.0, rng.uniform(0.5, 2.0), -rng.uniform(0.005, 0.05))
        prob = PortfolioProblem(rng.uniform(5, 20), np.array([rng.uniform(0.5, 0.9), 1.05, rng.uniform(1.5, 1.8)]),
                                np.array([0.3, 0.4, 0.3]), quad.utility())
        net, alpha = instance(rng, n=int(rng.integers(4, 12)), alpha_max=0.7)
        lam = lambda_closed_form(prob, quad, net, alpha)
        s = net.weights @ lam
        br = np.array([best_response_numeric(prob, alpha[i], s[i]) for i in range(net.n)])
        gap = max(gap, float(np.max(np.abs(br - lam))))
        rep = dara_comparative_static(prob, net, alpha, int(rng.integers(net.n)), 0.05, check_dara=False)
        quad_inverted += bool(rep.dlam[rep.j] > 0 and np.all(rep.dlam >= -1e-9))
    dara_ok = 0
    for _ in range(20):
        util = make_utility("crra", gamma=rng.uniform(1.5, 4.0), shift=rng.uniform(0.5, 1.5))
        prob = PortfolioProblem(10.0, np.array([0.7, 1.1, 1.5]), np.array([0.25, 0.5, 0.25]), util)
        net, alpha = instance(rng, n=int(rng.integers(4, 12)), alpha_max=0.6)
        dara_ok += dara_comparative_static(prob, net, alpha, int(rng.integers(net.n)), rng.uniform(0.02, 0.1)).holds
    el = time.perf_counter() - t0
    ok = gap <= 1e-6 and dara_ok == 20 and quad_inverted == 20 and el < 60
    assert record(9, "portfolio", ok,
                  f"closed form vs optimizer {gap:.2e} (tol 1e-6), DARA static {dara_ok}/20, "
                  f"quadratic inverted {quad_inverted}/20", el, 60)


def test_c10_sorting():
    rng = np.random.default_rng(SEED + 10)
    t0 = time.perf_counter()
    worked = LaborEconomy(2.0, 2.0, 0.5, 0.8, np.zeros(100))
    c_w = sorting_fixed_point(worked)
    worked_ok = abs(c_w - 2 / (3 * 0.8)) <= 1e-6 and abs(c_w - sorting_grid_oracle(worked)) <= 1e-6
    above_half = separated = statics = aggregate = 0
    for _ in range(50):
        econ = random_economy(rng, n_workers=int(rng.integers(10, 100)) * 2)
        eq = solve_sorting(econ)
        above_half += eq.sorting > 0.5
        separated += threshold_separated(eq)
        statics += all(comparative_statics_sorting(econ, d, rng.uniform(0.01, 0.3)).holds
                       for d in ("alpha2_shift", "k_H", "e_S"))
        econ2 = random_economy(rng, n_workers=60, alpha_total=rng.uniform(0.2, 0.8))
        aggregate += aggregate_effects(econ2, rng.uniform(0.01, 0.15)).holds
    el = time.perf_counter() - t0
    ok = worked_ok and above_half == separated == statics == aggregate == 50 and el < 60
    assert record(10, "sorting", ok,
                  f"worked c* = {c_w:.7f} (2/2.4), c* > 1/2 {above_half}/50, threshold {separated}/50, "
                  f"monotone {statics}/50, aggregate {aggregate}/50", el, 60)


def test_c11_stability():
    rng = np.random.default_rng(SEED + 11)
    t0 = time.perf_counter()
    cliques_ok = flagged_ok = 0
    for k in range(1000):
        n = int(rng.integers(3, 10))
        wages = rng.choice([1.0, 1.5, 2.0, 3.0], n)
        if k % 2:
            # cliques of equal-wage agents
            A = (wages[:, None] == wages[None, :]).astype(float)
            np.fill_diagonal(A, 0.0)
            A[A.sum(axis=1) == 0] = 0.0
            G = 0.2 * A
            cliques_ok += check_pairwise_stability(G, wages) == []
        else:
            A = np.triu(rng.random((n, n)) < 0.5, 1)
            G = 0.15 * (A + A.T)
            cut = {(v.i, v.j) for v in check_pairwise_stability(G, wages) if v.kind == "cut"}
            cross = {(i, j) for i in range(n) for j in range(i + 1, n) if G[i, j] > 0 and wages[i] != wages[j]}
            flagged_ok += cut == cross
    el = time.perf_counter() - t0
    ok = cliques_ok == 500 and flagged_ok == 500 and el < 30
    assert record(11, "pairwise stability", ok,
                  f"equal-wage cliques stable {cliques_ok}/500, cross-wage links flagged {flagged_ok}/500", el, 30)


def test_c12_determinism(default_run, tmp_path):
    _, _, serial = default_run
    cmd = [sys.executable, "-m", "socialref.cli", "simulate-mccall", "--paper-defaults",
           "--networks", str(SIM.n_networks), "--seed", str(SIM.seed)]
    again, four = tmp_path / "again", tmp_path / "four"
    subprocess.run(cmd + ["--out", str(again)], check=True)
    subprocess.run(cmd + ["--out", str(four), "--workers", "4"], check=True)
    names = ["records.csv", "scatter_centrality.csv", "scatter_alpha.csv"]
    same_run = all((serial / n).read_bytes() == (again / n).read_bytes() for n in names)
    same_workers = all((serial / n).read_bytes() == (four / n).read_bytes() for n in names)
    ok = same_run and same_workers
    assert record(12, "determinism", ok,
                  f"repeat run identical: {same_run}, 1 vs 4 workers identical: {same_workers}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
