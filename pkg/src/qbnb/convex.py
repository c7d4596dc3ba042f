"""Projected gradient minimization of a smooth convex function over a box."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["BoxMinResult", "frank_wolfe_gap", "minimize_box_convex"]


@dataclass
class BoxMinResult:
    x: np.ndarray
    value: float
    gap: float
    iterations: int
    evaluations: int
    converged: bool

    @property
    def lower_bound(self) -> float:
        """Certified lower bound on the box minimum (valid for convex objectives)."""
        return self.value - self.gap


def frank_wolfe_gap(x, g, lower, upper) -> float:
    """``max over the box of g.(x - y)``.

    For a convex function with gradient ``g`` at ``x`` this bounds
    ``f(x) - min f`` over the box.
    """
    return float(np.sum(np.where(g > 0, g * (x - lower), g * (x - upper))))


def minimize_box_convex(fg, lower, upper, x0, tol_gap: float, curvature: float | None = None,
                        max_iter: int = 10_000, armijo: float = 1e-4, shrink: float = 0.5) -> BoxMinResult:
    """Minimize over ``[lower, upper]`` given ``fg(x) -> (value, gradient)``.

    Projected gradient steps with Barzilai-Borwein trial lengths and Armijo
    backtracking. Stops once the Frank-Wolfe gap is at most ``tol_gap`` or
    the projected gradient vanishes to ``1e-9 * (1 + |f|)``. ``curvature``, an
    upper bound on the Hessian spectrum, seeds the first step length.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    val, g = fg(x)
    nev = 1
    t = 1.0 / curvature if curvature and curvature > 0 else 1.0
    gap = frank_wolfe_gap(x, g, lower, upper)
    converged = False
    it = 0
    for it in range(max_iter):
        gap = frank_wolfe_gap(x, g, lower, upper)
        pg = x - np.clip(x - g, lower, upper)
        if gap <= tol_gap or math.sqrt(float(pg @ pg)) <= 1e-9 * (1 + abs(val)):
            converged = True
            break
        while True:
            xn = np.clip(x - t * g, lower, upper)
            d = xn - x
            if not np.any(d):
                break
            vn, gn = fg(xn)
            nev += 1
            if vn <= val + armijo * float(g @ d):
                break
            t *= shrink
        if not np.any(d):
            # step length underflowed: no representable descent left
            break
        s, y = d, gn - g
        sy = float(s @ y)
        t = float(s @ s) / sy if sy > 0 else (1.0 / curvature if curvature and curvature > 0 else 2 * t)
        x, val, g = xn, vn, gn
    else:
        it = max_iter
    gap = max(frank_wolfe_gap(x, g, lower, upper), 0.0)
    if gap <= tol_gap:
        converged = True
    return BoxMinResult(x, float(val), gap, it, nev, converged)
