"""Command-line harness.

``qbnb solve``    minimize one catalog problem with one rule
``qbnb compare``  run a benchmark grid from a JSON config and write a CSV table
``qbnb bounds``   interval Lipschitz constant of an expression, with a grid check

Exit codes: 0 converged, 1 time or generation limit, 2 configuration error,
3 oracle or interval-domain error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import re
import sys
import time
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import ConstraintViolation, DomainError, MissingConstant, MissingOracle, ParseError
from .functions import get_problem, random_rastrigin_like
from .geometry import Box
from .interval import lipschitz_bound, sampled_derivative_norm
from .rules import RULES
from .search import SearchConfig, SolveResult, SolveStatus, solve

__all__ = ["main", "build_parser", "result_record", "write_generation_csv", "run_compare",
           "STATS_COLUMNS", "COMPARE_COLUMNS", "SCHEMA_VERSION"]

EXIT_OK, EXIT_LIMIT, EXIT_CONFIG, EXIT_ORACLE = 0, 1, 2, 3
SCHEMA_VERSION = 1
STATS_COLUMNS = ("depth", "cubes_processed", "cumulative_cubes", "cumulative_time_ms", "lb", "ub")
COMPARE_COLUMNS = ("function", "algorithm", "d", "status", "seconds", "accuracy", "iterations",
                   "f_best", "lb", "error", "runs")

log = logging.getLogger("qbnb")


class ConfigError(Exception):
    pass


def _num(v: float):
    """JSON-safe float: infinities and NaN become strings."""
    v = float(v)
    return v if math.isfinite(v) else str(v)


def result_record(res: SolveResult, function: str, dim: int, algorithm: str, eps: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "algorithm": algorithm,
        "function": function,
        "dim": dim,
        "eps": eps,
        "status": res.status.value,
        "f_best": _num(res.f_best),
        "x_best": [float(v) for v in res.x_best],
        "lb": _num(res.lb),
        "gap": _num(res.gap),
        "generations": len(res.generations) - 1,
        "total_cubes": res.total_cubes,
        "work": res.work,
        "wall_time": res.wall_time,
    }


def write_generation_csv(res: SolveResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_COLUMNS)
        for g in res.generations:
            w.writerow([g.depth, g.cubes_processed, g.cumulative_cubes, f"{g.cumulative_time * 1e3:.3f}",
                        repr(g.lb), repr(g.ub)])


# ---------------------------------------------------------------------------
# solve

def _load_problem(name: str, dim, seed: int):
    try:
        return get_problem(name, dim, seed)
    except (KeyError, ValueError) as err:
        raise ConfigError(str(err.args[0] if err.args else err)) from err


def cmd_solve(args) -> int:
    if args.algo not in RULES:
        raise ConfigError(f"unknown algorithm {args.algo!r}; choose from {', '.join(RULES)}")
    try:
        cfg = SearchConfig(eps=args.eps, time_limit=args.time_limit, max_generations=args.max_generations,
                           parallelism=args.parallel)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    problem = _load_problem(args.function, args.dim, args.seed)
    res = solve(problem, args.algo, cfg)
    rec = result_record(res, problem.name, problem.dim, args.algo, args.eps)
    text = json.dumps(rec, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.stats:
        write_generation_csv(res, args.stats)
    return EXIT_OK if res.status is SolveStatus.CONVERGED else EXIT_LIMIT


# ---------------------------------------------------------------------------
# compare

def _row(function, algorithm, d, status, seconds="", accuracy="", iterations="", f_best="", lb="",
         error="", runs=1) -> dict:
    return dict(zip(COMPARE_COLUMNS, (function, algorithm, d, status, seconds, accuracy, iterations,
                                      f_best, lb, error, runs)))


def _run_one(problem, algo: str, cfg: SearchConfig, force_unconstrained: bool):
    if force_unconstrained:
        problem = dataclasses.replace(problem, unconstrained=True)
    t = time.perf_counter()
    res = solve(problem, algo, cfg)
    return res, time.perf_counter() - t


_ROW_ERRORS = (MissingConstant, MissingOracle, ConstraintViolation, DomainError, ArithmeticError, ValueError)


def _table_rows(conf: dict, cfg: SearchConfig, force: set) -> list[dict]:
    rows = []
    for fspec in conf["functions"]:
        if isinstance(fspec, str):
            fspec = {"name": fspec}
        name = fspec["name"]
        try:
            problem = get_problem(name, fspec.get("dim"), fspec.get("seed", 0))
        except (KeyError, ValueError) as err:
            raise ConfigError(str(err.args[0] if err.args else err)) from err
        for algo in conf["algorithms"]:
            try:
                res, secs = _run_one(problem, algo, cfg, algo in force)
            except _ROW_ERRORS as err:
                rows.append(_row(problem.name, algo, problem.dim, f"error: {err}"))
                continue
            acc = "" if res.status is SolveStatus.CONVERGED else repr(res.gap)
            err_v = "" if problem.f_min is None else repr(res.f_best - problem.f_min)
            rows.append(_row(problem.name, algo, problem.dim, res.status.value, f"{secs:.3f}", acc,
                             res.work["cubes"], repr(res.f_best), repr(res.lb), err_v))
    return rows


def _random_rows(conf: dict, cfg: SearchConfig, force: set) -> list[dict]:
    """One row per algorithm, averaged over seeded random Rastrigin-like
    problems. The error column is the largest excess of the reported value
    over the best value any algorithm found for the same seed."""
    delta = float(conf.get("delta", -1.0))
    seeds = conf.get("seeds", list(range(1, 11)))
    algos = conf["algorithms"]
    runs: dict = {a: [] for a in algos}
    failures: dict = {}
    for seed in seeds:
        problem = random_rastrigin_like(seed, delta)
        for algo in algos:
            try:
                runs[algo].append(_run_one(problem, algo, cfg, algo in force))
            except _ROW_ERRORS as err:
                failures.setdefault(algo, str(err))
                runs[algo].append(None)
    best = []
    for i in range(len(seeds)):
        vals = [runs[a][i][0].f_best for a in algos if runs[a][i] is not None]
        best.append(min(vals) if vals else math.nan)
    kind = "constrained" if delta < 0 else "unconstrained"
    fname = f"rastrigin-random-{kind}"
    rows = []
    for algo in algos:
        if algo in failures:
            rows.append(_row(fname, algo, 3, f"error: {failures[algo]}", runs=len(seeds)))
            continue
        results = [r for r, _ in runs[algo]]
        secs = float(np.mean([s for _, s in runs[algo]]))
        iters = float(np.mean([r.work["cubes"] for r in results]))
        statuses = {r.status.value for r in results}
        status = statuses.pop() if len(statuses) == 1 else "mixed"
        acc = max(r.gap for r in results)
        err_v = max(r.f_best - b for r, b in zip(results, best))
        rows.append(_row(fname, algo, 3, status, f"{secs:.3f}",
                         "" if status == SolveStatus.CONVERGED.value else repr(acc),
                         repr(iters), repr(float(np.mean([r.f_best for r in results]))),
                         repr(float(np.mean([r.lb for r in results]))), repr(err_v), len(seeds)))
    return rows


def run_compare(conf: dict) -> list[dict]:
    """Rows of the comparison table described by ``conf``.

    Keys: ``algorithms`` (list), ``eps``, ``time_limit``, ``max_generations``,
    ``parallel``, ``force_unconstrained`` (algorithms run with the
    unconstrained flag forced on), and either ``functions`` (names or
    ``{"name", "dim", "seed"}`` objects) or ``mode: "random-rastrigin"`` with
    ``delta`` and ``seeds``.
    """
    if not isinstance(conf, dict) or not conf.get("algorithms"):
        raise ConfigError("config needs a non-empty 'algorithms' list")
    for algo in conf["algorithms"]:
        if algo not in RULES:
            raise ConfigError(f"unknown algorithm {algo!r}")
    try:
        cfg = SearchConfig(eps=float(conf.get("eps", 1e-8)), time_limit=float(conf.get("time_limit", 60.0)),
                           max_generations=int(conf.get("max_generations", 200)),
                           parallelism=int(conf.get("parallel", 1)))
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from err
    force = set(conf.get("force_unconstrained", ()))
    mode = conf.get("mode", "table")
    if mode == "random-rastrigin":
        return _random_rows(conf, cfg, force)
    if mode != "table":
        raise ConfigError(f"unknown mode {mode!r}")
    if not conf.get("functions"):
        raise ConfigError("config needs a non-empty 'functions' list")
    return _table_rows(conf, cfg, force)


def cmd_compare(args) -> int:
    try:
        with open(args.config) as fh:
            conf = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config: {err}") from err
    rows = run_compare(conf)
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, COMPARE_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds

def parse_domain(text: str, dim: int) -> Box:
    """``"lo,hi"`` pairs separated by commas, semicolons or spaces. A single
    pair is repeated for every variable."""
    try:
        vals = [float(t) for t in re.split(r"[,;\s]+", text.strip()) if t]
    except ValueError as err:
        raise ConfigError(f"bad domain {text!r}") from err
    if not vals or len(vals) % 2:
        raise ConfigError(f"domain needs lo,hi pairs, got {text!r}")
    pairs = list(zip(vals[::2], vals[1::2]))
    if len(pairs) == 1:
        pairs *= max(dim, 1)
    if len(pairs) < dim:
        raise ConfigError(f"expression uses {dim} variables but the domain has {len(pairs)}")
    try:
        return Box.from_bounds(pairs)
    except ValueError as err:
        raise ConfigError(str(err)) from err


def cmd_bounds(args) -> int:
    try:
        e = ex.parse(args.expr)
    except ParseError as err:
        raise ConfigError(f"parse error: {err}") from err
    dim = e.varmask.bit_length()
    domain = parse_domain(args.domain, dim)
    L = lipschitz_bound(e, domain, args.order)
    grid = sampled_derivative_norm(e, domain, args.order, n_points=args.grid_points)
    ok = L >= grid
    print(f"L{args.order} = {L!r}")
    print(f"grid max = {grid!r} ({args.grid_points} points)")
    print(f"sound: {'yes' if ok else 'NO'}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qbnb", description="Deterministic box-constrained global minimization.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="minimize one problem")
    s.add_argument("--function", required=True)
    s.add_argument("--dim", type=int)
    s.add_argument("--algo", required=True)
    s.add_argument("--eps", type=float, default=1e-8)
    s.add_argument("--time-limit", type=float, default=math.inf)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--stats")
    s.add_argument("--out")
    s.add_argument("--parallel", type=int, default=1)
    s.add_argument("--max-generations", type=int, default=200)
    s.set_defaults(handler=cmd_solve)

    c = sub.add_parser("compare", help="benchmark several algorithms")
    c.add_argument("--config", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(handler=cmd_compare)

    b = sub.add_parser("bounds", help="interval Lipschitz constant of an expression")
    b.add_argument("--expr", required=True)
    b.add_argument("--domain", required=True)
    b.add_argument("--order", type=int, choices=(1, 2, 3), required=True)
    b.add_argument("--grid-points", type=int, default=10**6)
    b.set_defaults(handler=cmd_bounds)
    return ap


_VALUE_FLAGS = ("--expr", "--domain")


def _glue_values(argv: Sequence[str]) -> list[str]:
    # values such as "-1,1" or "-x1^2" would otherwise be taken for options
    out, it = [], iter(argv)
    for a in it:
        if a in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = _glue_values(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ConstraintViolation as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (MissingConstant, MissingOracle, DomainError, ArithmeticError) as err:
        print(f"oracle error: {err}", file=sys.stderr)
        return EXIT_ORACLE


if __name__ == "__main__":
    sys.exit(main())
