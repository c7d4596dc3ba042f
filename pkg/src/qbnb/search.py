"""Breadth-first (quasi-)branch and bound.

Each generation walks the list of live cubes in path order. A cube whose
bound ``q`` is at most the incumbent ``ub`` is bisected along its longest
edge, both children are bounded and sampled, and ``ub`` / ``x_best`` are
updated on strict improvement. ``lb`` is the smallest bound in the new list
and the search stops once ``ub - lb <= eps``.

With ``parallelism > 1`` children are bounded speculatively by a thread pool
for every cube that survives the generation-start ``ub``; the elimination
tests and incumbent updates are then replayed serially in path order, so the
result is identical to a serial run.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .geometry import Cube, bisect_longest
from .problem import Problem, RuleOutcome, Status
from .rules import check_requirements, make_rule

__all__ = ["SearchConfig", "GenerationRecord", "SolveResult", "SolveStatus", "MinimizerEvent", "solve"]

log = logging.getLogger(__name__)


class SolveStatus(str, enum.Enum):
    CONVERGED = "converged"
    TIME_LIMIT = "time_limit"
    GENERATION_LIMIT = "generation_limit"


@dataclass
class SearchConfig:
    eps: float
    time_limit: float = math.inf
    max_generations: int = 200
    parallelism: int = 1
    instrument_minimizer: Optional[Sequence] = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.max_generations < 0:
            raise ValueError("max_generations must be >= 0")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


@dataclass
class GenerationRecord:
    depth: int
    cubes_processed: int
    cubes_eliminated: int
    cumulative_cubes: int
    lb: float
    ub: float
    cumulative_time: float

    @property
    def gap(self) -> float:
        return self.ub - self.lb


@dataclass(frozen=True)
class MinimizerEvent:
    """A tracked minimizer was eliminated, priced out, or dropped from the list."""

    kind: str  # "certificate", "priced_out" or "lost"
    generation: int
    minimizer: int
    path_id: int = 0
    qlb: float = math.nan
    ub: float = math.nan


@dataclass
class SolveResult:
    x_best: np.ndarray
    f_best: float
    lb: float
    status: SolveStatus
    generations: list[GenerationRecord]
    work: dict
    rule: str = ""
    minimizer_events: list[MinimizerEvent] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def gap(self) -> float:
        return self.f_best - self.lb

    @property
    def total_cubes(self) -> int:
        return self.generations[-1].cumulative_cubes if self.generations else 0

    def signature(self) -> dict:
        """All fields except wall-clock timings, for reproducibility checks."""
        return {
            "x_best": self.x_best.tolist(),
            "f_best": self.f_best,
            "lb": self.lb,
            "status": self.status.value,
            "work": dict(self.work),
            "rule": self.rule,
            "events": list(self.minimizer_events),
            "generations": [
                (g.depth, g.cubes_processed, g.cubes_eliminated, g.cumulative_cubes, g.lb, g.ub)
                for g in self.generations
            ],
        }


_WORK_KEYS = ("n_f", "n_grad", "n_hess", "n_newton")


class _Tracker:
    def __init__(self, minimizers):
        pts = minimizers
        if pts is None:
            self.points = []
        else:
            arr = np.asarray(pts, dtype=float)
            self.points = [arr] if arr.ndim == 1 else list(arr)
        self.events: list[MinimizerEvent] = []

    def __bool__(self):
        return bool(self.points)

    def hits(self, cube: Cube):
        for i, x in enumerate(self.points):
            if cube.contains(x, tol=1e-12 * (1.0 + cube.radius)):
                yield i

    def outcome(self, g, cube, out: RuleOutcome):
        if out.status is Status.ELIMINATED:
            for i in self.hits(cube):
                self.events.append(MinimizerEvent("certificate", g, i, cube.path_id, out.qlb))

    def priced_out(self, g, cube, q, ub):
        for i in self.hits(cube):
            self.events.append(MinimizerEvent("priced_out", g, i, cube.path_id, q, ub))

    def coverage(self, g, frontier):
        for i, x in enumerate(self.points):
            if not any(True for c, _ in frontier if c.contains(x, tol=1e-12 * (1.0 + c.radius))):
                self.events.append(MinimizerEvent("lost", g, i))


def _bound_children(problem, rule, cube):
    out = []
    for ch in bisect_longest(cube):
        res = rule(problem, ch)
        fs = res.f_sample
        extra = 0
        if fs is None:
            fs = float(problem.objective(res.sample))
            extra = 1
        out.append((ch, res, fs, extra))
    return out


def solve(problem: Problem, rule, cfg: SearchConfig,
          observer: Optional[Callable[[int, Cube, RuleOutcome, float], None]] = None) -> SolveResult:
    """Run the breadth-first search.

    ``rule`` is a name from :data:`qbnb.rules.RULES` or a callable
    ``(problem, cube) -> RuleOutcome``. ``observer`` is called as
    ``observer(generation, cube, outcome, f_sample)`` for every cube whose
    bound is committed, in path order.
    """
    if isinstance(rule, str):
        check_requirements(rule, problem)
        rule_name = rule
        rule = make_rule(rule, cfg.eps)
    else:
        rule_name = getattr(rule, "__name__", type(rule).__name__)

    t0 = time.perf_counter()
    deadline = t0 + cfg.time_limit
    tracker = _Tracker(cfg.instrument_minimizer)
    work = dict.fromkeys(_WORK_KEYS, 0)
    work["cubes"] = 0

    def commit(g, cube, res, fs, extra):
        for k in _WORK_KEYS:
            work[k] += getattr(res, k)
        work["n_f"] += extra
        work["cubes"] += 1
        if tracker:
            tracker.outcome(g, cube, res)
        if observer is not None:
            observer(g, cube, res, fs)

    root = problem.domain.to_cube()
    res, fs, extra = _bound_root(problem, rule, root)
    commit(0, root, res, fs, extra)
    ub = fs
    x_best = np.array(res.sample, dtype=float)
    frontier = [(root, res.qlb)]
    lb = res.qlb
    records = [GenerationRecord(0, 1, 0, 1, lb, ub, time.perf_counter() - t0)]
    if tracker:
        tracker.coverage(0, frontier)
    status = SolveStatus.CONVERGED
    g = 0
    pool = ThreadPoolExecutor(cfg.parallelism) if cfg.parallelism > 1 else None
    try:
        while ub - lb > cfg.eps:
            if g >= cfg.max_generations:
                status = SolveStatus.GENERATION_LIMIT
                break
            if time.perf_counter() > deadline:
                status = SolveStatus.TIME_LIMIT
                break
            precomputed = None
            if pool is not None:
                live = [c for c, q in frontier if q <= ub]
                chunk = max(1, len(live) // (4 * cfg.parallelism))
                precomputed = dict(zip(
                    (c.path_id for c in live),
                    pool.map(lambda c: _bound_children(problem, rule, c), live, chunksize=chunk),
                ))
            nxt = []
            eliminated = 0
            timed_out = False
            for cube, q in frontier:
                if time.perf_counter() > deadline:
                    timed_out = True
                    break
                if not q <= ub:
                    eliminated += 1
                    if tracker:
                        tracker.priced_out(g, cube, q, ub)
                    continue
                kids = precomputed[cube.path_id] if precomputed is not None else _bound_children(problem, rule, cube)
                for ch, res, fs, extra in kids:
                    commit(g + 1, ch, res, fs, extra)
                    nxt.append((ch, res.qlb))
                    if fs < ub:
                        ub = fs
                        x_best = np.array(res.sample, dtype=float)
            if timed_out:
                status = SolveStatus.TIME_LIMIT
                break
            g += 1
            frontier = nxt
            lb = min((q for _, q in frontier), default=math.inf)
            records.append(GenerationRecord(g, len(nxt), eliminated, work["cubes"], lb, ub,
                                            time.perf_counter() - t0))
            if tracker:
                tracker.coverage(g, frontier)
            log.debug("generation %d: %d cubes, lb=%.6g ub=%.6g", g, len(nxt), lb, ub)
    finally:
        if pool is not None:
            pool.shutdown()

    if lb > ub:
        # every remaining cube was priced out: ub is already optimal within rule slack
        lb = ub
    return SolveResult(
        x_best=x_best, f_best=float(ub), lb=float(lb), status=status, generations=records, work=work,
        rule=rule_name, minimizer_events=tracker.events, wall_time=time.perf_counter() - t0,
    )


def _bound_root(problem, rule, root):
    res = rule(problem, root)
    if res.f_sample is None:
        return res, float(problem.objective(res.sample)), 1
    return res, res.f_sample, 0
