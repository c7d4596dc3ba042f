"""End-to-end acceptance criteria.

Each test prints one ``[PASS]`` / ``[FAIL]`` line with the measured numbers;
the lines are repeated in a summary section at the end of the pytest run.
Set ``QBNB_SLOW=1`` to include the optional ten-minute Goldstein-Price run.
"""
import dataclasses
import math
import os

import numpy as np
import pytest

from qbnb import (Cube, SearchConfig, SolveStatus, Status, bisect_longest, contraction_factor, dixon_szego,
                  random_rastrigin_like, rastrigin, solve)
from qbnb.functions import DIXON_SZEGO, shifted_quadratic
from qbnb.interval import lipschitz_bounds, sampled_derivative_norm
from qbnb.rules import make_rule, rule_lipschitz_gradient, rule_qbnb2

from conftest import ACCEPTANCE_LINES, random_subcube
from test_functions import CONSTRAINED_MINIMA, ORACLE_MINIMA

EPS = 1e-8


def report(n, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def rastrigin_runs():
    p = rastrigin(2)
    third = []

    def watch(g, cube, out, fs):
        if out.order == 3 and out.status is Status.BOUNDED:
            third.append((cube.radius, fs, out.qlb, out.regularizer))

    runs = {
        "qbnb2": solve(p, "qbnb2", SearchConfig(EPS, time_limit=120)),
        "qbnb23": solve(p, "qbnb23", SearchConfig(EPS, time_limit=120), observer=watch),
        "alphabb": solve(p, "alphabb", SearchConfig(EPS, time_limit=120)),
        "lipschitz": solve(p, "lipschitz", SearchConfig(EPS, time_limit=60)),
    }
    return p, runs, third


def test_criterion_01_rastrigin_convergence(rastrigin_runs):
    _, runs, _ = rastrigin_runs
    parts, ok = [], True
    for name in ("qbnb2", "qbnb23", "alphabb"):
        r = runs[name]
        good = (r.status is SolveStatus.CONVERGED and np.abs(r.x_best).max() <= 1e-4 and r.f_best <= EPS
                and r.wall_time <= 120)
        ok &= good
        parts.append(f"{name} {r.status.value} f={r.f_best:.1e} |x|inf={np.abs(r.x_best).max():.1e} "
                     f"{r.wall_time:.1f}s")
    lip = runs["lipschitz"]
    ok &= lip.status is SolveStatus.TIME_LIMIT
    parts.append(f"lipschitz {lip.status.value} gap={lip.gap:.1e} after {lip.wall_time:.0f}s")
    report(1, "Rastrigin d=2 solved by qBnB(2), qBnB(2+3), aBB; Lipschitz times out", ok, "; ".join(parts))


def test_criterion_02_clustering(rastrigin_runs):
    _, runs, _ = rastrigin_runs
    lip_gens, q2_gens = runs["lipschitz"].generations, runs["qbnb2"].generations
    # deepest generation reached by every algorithm of the Rastrigin runs
    depth = min(len(r.generations) - 1 for r in runs.values())
    lip, q2 = lip_gens[depth].cumulative_cubes, q2_gens[depth].cumulative_cubes
    # for reference: the deepest generation shared by the two compared algorithms
    pair = min(len(lip_gens), len(q2_gens)) - 1
    ratio_pair = lip_gens[pair].cumulative_cubes / q2_gens[pair].cumulative_cubes
    report(2, "Lipschitz cumulative cubes >= 10x qBnB(2) at common depth", lip >= 10 * q2,
           f"common depth {depth} (all four algorithms): lipschitz {lip}, qbnb2 {q2}, ratio {lip / q2:.1f}; "
           f"at depth {pair} (lipschitz and qbnb2 only) ratio {ratio_pair:.0f}")


def test_criterion_03_dominance():
    problems = [rastrigin(2), rastrigin(3), random_rastrigin_like(1, 1.0), dixon_szego("branin"),
                dixon_szego("camelback"), dixon_szego("hartman3")]
    rng = np.random.default_rng(3)
    n, worst = 0, -math.inf
    for p in problems:
        for _ in range(200):
            c = random_subcube(rng, p.domain)
            a, b = rule_lipschitz_gradient(p, c).qlb, rule_qbnb2(p, c).qlb
            worst = max(worst, (a - b) / (1 + abs(b)))
            n += 1
    # equality at critical centers
    eq_ok = True
    for p in problems[:3]:
        for r in (1e-3, 0.1, 1.0):
            c = Cube(np.zeros(p.dim), np.full(p.dim, r))
            eq_ok &= rule_lipschitz_gradient(p, c).qlb == rule_qbnb2(p, c).qlb
    ok = worst <= 1e-12 and eq_ok and n >= 1000
    report(3, "Lipschitz-gradient bound never above qBnB(2)", ok,
           f"{n} cubes on {len(problems)} functions, max relative excess {worst:.2e}, equality at g=0: {eq_ok}")


def test_criterion_04_third_order_gap(rastrigin_runs):
    p, _, third = rastrigin_runs
    worst = max(fs - q - (3 * p.L3 * r ** 3 + EPS / 200 + 1e-12) for r, fs, q, _ in third)
    report(4, "third-order gap <= 3 L3 r^3 + eps/200 on every ThirdOrder cube", bool(third) and worst <= 0,
           f"{len(third)} cubes, max excess over bound {worst:.2e}")


def test_criterion_05_eventual_exactness(rastrigin_runs):
    _, runs, third = rastrigin_runs
    gaps = [g.gap for g in runs["qbnb23"].generations]
    drop = None
    for i, gap in enumerate(gaps):
        if gap > 1e-2:
            for j in range(i + 1, min(i + 4, len(gaps))):
                if gaps[j] <= EPS:
                    drop = (i, j)
                    break
    exact = [(fs, q) for _, fs, q, lam in third if lam == 0.0]
    exact_ok = bool(exact) and all(fs - q == fs - (fs - EPS / 200) and
                                   abs((fs - q) - EPS / 200) <= 4 * math.ulp(max(abs(fs), EPS)) for fs, q in exact)
    ok = drop is not None and exact_ok
    detail = (f"gap drop generations {drop}: {gaps[drop[0]]:.1e} -> {gaps[drop[1]]:.1e}" if drop
              else "no fast gap drop")
    report(5, "qBnB(2+3) gap falls from >1e-2 to <=eps within 3 generations; lam=0 gap is eps/200",
           ok, f"{detail}; {len(exact)} lam=0 cubes exact: {exact_ok}")


def test_criterion_06_minimizer_retention():
    cases = [(rastrigin(2), [0.0, 0.0]), (shifted_quadratic(), [0.3])]
    rules = ["lipschitz", "lipgrad", "alphabb", "qbnb2", "cqbnb2", "qbnb3", "qbnb23"]
    events, parts = [], []
    for p, xs in cases:
        for rule in rules:
            limit = 20.0 if rule == "lipschitz" else 120.0
            r = solve(p, rule, SearchConfig(EPS, time_limit=limit, instrument_minimizer=xs))
            events += r.minimizer_events
            parts.append(f"{p.name}/{rule}:{r.status.value[:4]}")
    report(6, "no rule eliminates or prices out a cube holding the minimizer", not events,
           f"{len(events)} events over {len(parts)} runs ({', '.join(parts)})")


def test_criterion_07_constrained_experiment():
    cfg = SearchConfig(EPS, time_limit=120)
    cons = {a: [] for a in ("cqbnb2", "lipgrad", "qbnb2")}
    for seed in range(1, 11):
        p = random_rastrigin_like(seed, -1.0)
        cons["cqbnb2"].append(solve(p, "cqbnb2", cfg))
        cons["lipgrad"].append(solve(p, "lipgrad", cfg))
        # plain qBnB(2) is run as if the problem were unconstrained on purpose
        cons["qbnb2"].append(solve(dataclasses.replace(p, unconstrained=True), "qbnb2", cfg))
    agree = max(abs(a.f_best - b.f_best) for a, b in zip(cons["cqbnb2"], cons["lipgrad"]))
    it_c = sum(r.work["cubes"] for r in cons["cqbnb2"])
    it_l = sum(r.work["cubes"] for r in cons["lipgrad"])
    best = [min(a.f_best, b.f_best) for a, b in zip(cons["cqbnb2"], cons["lipgrad"])]
    q2_dev = max(r.f_best - b for r, b in zip(cons["qbnb2"], best))
    oracle_dev = max(abs(r.f_best - CONSTRAINED_MINIMA[s]) for s, r in enumerate(cons["cqbnb2"], 1))
    unc_c, unc_2 = [], []
    for seed in range(1, 11):
        p = random_rastrigin_like(seed, 1.0)
        unc_c.append(solve(p, "cqbnb2", cfg).work["cubes"])
        unc_2.append(solve(p, "qbnb2", cfg).work["cubes"])
    checks = {
        "agree<=1e-8": agree <= 1e-8,
        "cqbnb2<=half lipgrad": it_c <= it_l / 2,
        "qbnb2 deviates": q2_dev > 1e-8,
        "unconstrained counts equal": unc_c == unc_2,
    }
    detail = (f"delta=-1: |cqbnb2-lipgrad|={agree:.1e} (oracle dev {oracle_dev:.1e}), cubes cqbnb2 {it_c} vs "
              f"lipgrad {it_l} (ratio {it_l / it_c:.2f}), qbnb2 max deviation {q2_dev:.1e}; delta=+1 mean cubes "
              f"cqbnb2 {np.mean(unc_c):.0f} vs qbnb2 {np.mean(unc_2):.0f}; "
              + ", ".join(f"{k}:{'ok' if v else 'NO'}" for k, v in checks.items()))
    report(7, "constrained Rastrigin-like experiment", all(checks.values()), detail)


def test_criterion_08_dixon_szego():
    parts, ok = [], True
    for name in ("branin", "camelback"):
        p = dixon_szego(name)
        for algo in ("qbnb2", "qbnb23"):
            r = solve(p, algo, SearchConfig(EPS, time_limit=60))
            dev = abs(r.f_best - ORACLE_MINIMA[name][0])
            good = r.status is SolveStatus.CONVERGED and dev <= 1e-6
            ok &= good
            parts.append(f"{name}/{algo} {r.status.value} dev {dev:.1e} {r.wall_time:.1f}s")
    for name in ("shekel5", "shekel7", "shekel10", "hartman3", "hartman6"):
        p = dixon_szego(name)
        f_ref = ORACLE_MINIMA[name][0]
        for algo in ("qbnb2", "qbnb23"):
            r = solve(p, algo, SearchConfig(EPS, time_limit=60))
            good = r.lb <= f_ref <= r.f_best
            ok &= good
            parts.append(f"{name}/{algo} {r.status.value} lb<=f*<=ub:{good}")
    if os.environ.get("QBNB_SLOW"):
        r = solve(dixon_szego("goldstein-price"), "qbnb23", SearchConfig(1e-4, time_limit=600))
        parts.append(f"goldstein-price/qbnb23 {r.status.value} gap {r.gap:.1e} (informational)")
    report(8, "Dixon-Szego desk subset", ok, "; ".join(parts))


def test_criterion_09_interval_soundness():
    problems = {name: dixon_szego(name) for name in DIXON_SZEGO}
    problems["rastrigin"] = rastrigin(2)
    worst, parts = -math.inf, []
    for name, p in problems.items():
        L = lipschitz_bounds(p.expression, p.domain, (2, 3))
        for order in (2, 3):
            grid = sampled_derivative_norm(p.expression, p.domain, order, n_points=10**6)
            worst = max(worst, grid - L[order])
            if grid > L[order]:
                parts.append(f"{name} L{order}={L[order]:.4g} < grid {grid:.4g}")
    L2 = lipschitz_bounds(problems["rastrigin"].expression, problems["rastrigin"].domain, (2,))[2]
    ok = worst <= 0 and 560.27 <= L2 <= 600
    report(9, "interval L2/L3 dominate 10^6-point grid maxima", ok,
           f"{len(problems)} functions, max(grid - L) = {worst:.3g}, Rastrigin L2 = {L2:.4f}"
           + ("; " + "; ".join(parts) if parts else ""))


def test_criterion_10_geometry_and_determinism():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(5000):
        d = int(rng.integers(1, 11))
        c = Cube(rng.normal(size=d), np.exp(rng.uniform(-4, 4, size=d)))
        for ch in bisect_longest(c):
            worst = max(worst, ch.radius / (contraction_factor(d) * c.radius))
    specs = [(rastrigin(2), "qbnb23"), (random_rastrigin_like(2, -1.0), "cqbnb2"), (dixon_szego("branin"), "qbnb2")]
    same = []
    for p, rule in specs:
        a = solve(p, rule, SearchConfig(EPS, time_limit=120))
        b = solve(p, rule, SearchConfig(EPS, time_limit=120, parallelism=8))
        same.append(a.signature() == b.signature())
    ok = worst <= 1 + 1e-12 and all(same)
    report(10, "child radius contraction and parallel/serial identity", ok,
           f"max child/(q*parent) = {worst:.6f} over 10000 children; identical results {same}")
