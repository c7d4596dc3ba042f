"""Sampling and (quasi-)lower bound rules.

Each rule maps ``(problem, cube)`` to a :class:`RuleOutcome`. The classical
rules return true lower bounds; ``qbnb2``, ``cqbnb2``, ``qbnb3`` and
``qbnb23`` return quasi-lower bounds, which only need to under-estimate the
cube minimum when the cube contains a global minimizer.
"""
from __future__ import annotations

import enum
import math
from functools import partial
from typing import Callable

import numpy as np

from .convex import minimize_box_convex
from .geometry import Cube, ball2r_inside
from .linalg import eig_extremes
from .newton3 import rule_qbnb3
from .problem import Problem, RuleOutcome, Status

__all__ = [
    "rule_lipschitz", "rule_lipschitz_gradient", "rule_qbnb2", "rule_constrained_qbnb2", "rule_alphabb",
    "rule_qbnb3", "rule_qbnb23", "select_rule_qbnb23", "alphabb_weight", "BoundOrder", "RULES", "make_rule",
    "check_requirements",
]

Rule = Callable[[Problem, Cube], RuleOutcome]

BOUNDARY_RTOL = 1e-12


def rule_lipschitz(p: Problem, c: Cube) -> RuleOutcome:
    L1 = p.constant("L1")
    fx = float(p.objective(c.center))
    return RuleOutcome(fx - L1 * c.radius, c.center, f_sample=fx, n_f=1)


def rule_lipschitz_gradient(p: Problem, c: Cube) -> RuleOutcome:
    """Minimum over the cube of the linear model minus ``L2/2 r^2``; the
    sample is the minimizing corner, with a zero gradient entry taken as
    positive."""
    L2 = p.constant("L2")
    grad = p.oracle("gradient")
    x, h = c.center, c.half_edge
    fx = float(p.objective(x))
    g = np.asarray(grad(x), dtype=float)
    qlb = fx - float(np.abs(g) @ h) - L2 / 2 * c.radius ** 2
    corner = np.where(g >= 0, x - h, x + h)
    return RuleOutcome(qlb, corner, n_f=1, n_grad=1)


def rule_qbnb2(p: Problem, c: Cube) -> RuleOutcome:
    L2 = p.constant("L2")
    p.require_unconstrained("qbnb2")
    fx = float(p.objective(c.center))
    return RuleOutcome(fx - L2 / 2 * c.radius ** 2, c.center, f_sample=fx, n_f=1, order=2)


def constrained_sample(p: Problem, c: Cube):
    """Sample point on the faces the cube shares with the domain.

    Returns ``None`` when some edge is as long as the domain's, in which case
    no sample satisfies the relative interior condition.
    """
    a, b = p.domain.lower, p.domain.upper
    width = b - a
    tol = BOUNDARY_RTOL * width
    if np.any(2 * c.half_edge >= width - tol):
        return None
    lo, hi = c.lower, c.upper
    return np.where(np.abs(lo - a) <= tol, a, np.where(np.abs(hi - b) <= tol, b, c.center))


def rule_constrained_qbnb2(p: Problem, c: Cube) -> RuleOutcome:
    L2 = p.constant("L2")
    x = constrained_sample(p, c)
    if x is None:
        return RuleOutcome.unbounded(c.center)
    # max((x-lo)^2, (x-hi)^2) is (2h)^2 on a shared face and h^2 at the midpoint
    on_face = x != c.center
    if np.any(on_face):
        h2 = c.half_edge ** 2
        spread = float(np.sum(np.where(on_face, 4 * h2, h2)))
    else:
        spread = c.radius ** 2
    fx = float(p.objective(x))
    return RuleOutcome(fx - L2 / 2 * spread, x, f_sample=fx, n_f=1, order=2)


def alphabb_weight(lam_min_center: float, L3: float, r: float) -> float:
    """``max(0, -m/2)`` with ``m = lambda_min(x_C) - L3 r`` bounding the
    smallest Hessian eigenvalue over the cube."""
    return max(0.0, -(lam_min_center - L3 * r) / 2)


def rule_alphabb(p: Problem, c: Cube, eps: float, max_iter: int = 10_000) -> RuleOutcome:
    """Minimize ``f(x) + alpha (x - x_u).(x - x_l)`` over the cube.

    The bound is the attained value minus the Frank-Wolfe gap of the final
    iterate, which is a certified lower bound for the convex underestimator.
    """
    grad = p.oracle("gradient")
    hess = p.oracle("hessian")
    L3 = p.constant("L3")
    x0, r = c.center, c.radius
    lam_min, lam_max = eig_extremes(hess(x0))
    alpha = alphabb_weight(lam_min, L3, r)
    lo, hi = c.lower, c.upper
    mid2 = lo + hi

    def fg(x):
        fx = float(p.objective(x))
        g = np.asarray(grad(x), dtype=float)
        if alpha == 0.0:
            return fx, g
        return fx + alpha * float((x - hi) @ (x - lo)), g + alpha * (2 * x - mid2)

    curvature = max(lam_max + L3 * r, 0.0) + 2 * alpha
    res = minimize_box_convex(fg, lo, hi, x0, tol_gap=1e-2 * eps, curvature=curvature, max_iter=max_iter)
    work = dict(n_f=res.evaluations, n_grad=res.evaluations, n_hess=1, regularizer=alpha)
    if res.converged:
        return RuleOutcome(res.lower_bound, res.x, **work)
    if p.L2 is not None:
        fallback = rule_lipschitz_gradient(p, c)
        work["n_f"] += 1
        work["n_grad"] += 1
        return RuleOutcome(fallback.qlb, res.x, **work)
    return RuleOutcome(-math.inf, res.x, Status.UNBOUNDED, **work)


class BoundOrder(enum.IntEnum):
    SECOND = 2
    THIRD = 3


def select_rule_qbnb23(p: Problem, c: Cube) -> BoundOrder:
    """Third order only when the 2r-ball stays in the domain and
    ``L2/2 r^2 >= 3 L3 r^3``."""
    L2 = p.constant("L2")
    L3 = p.constant("L3")
    if ball2r_inside(c, p.domain) and 6.0 * L3 * c.radius <= L2:
        return BoundOrder.THIRD
    return BoundOrder.SECOND


def rule_qbnb23(p: Problem, c: Cube, eps: float) -> RuleOutcome:
    if select_rule_qbnb23(p, c) is BoundOrder.THIRD:
        return rule_qbnb3(p, c, eps, check_ball=False)
    return rule_qbnb2(p, c)


# name -> (rule factory taking eps, required constants, required oracles, needs unconstrained)
RULES = {
    "lipschitz": (lambda eps: rule_lipschitz, ("L1",), (), False),
    "lipgrad": (lambda eps: rule_lipschitz_gradient, ("L2",), ("gradient",), False),
    "alphabb": (lambda eps: partial(rule_alphabb, eps=eps), ("L3",), ("gradient", "hessian"), False),
    "qbnb2": (lambda eps: rule_qbnb2, ("L2",), (), True),
    "cqbnb2": (lambda eps: rule_constrained_qbnb2, ("L2",), (), False),
    "qbnb3": (lambda eps: partial(rule_qbnb3, eps=eps), ("L3",), ("gradient", "hessian"), True),
    "qbnb23": (lambda eps: partial(rule_qbnb23, eps=eps), ("L2", "L3"), ("gradient", "hessian"), True),
}


def check_requirements(name: str, p: Problem) -> None:
    """Raise the error the rule would raise, before any search work."""
    if name not in RULES:
        raise KeyError(f"unknown rule {name!r}; choose from {', '.join(RULES)}")
    _, consts, oracles, unconstrained = RULES[name]
    for k in consts:
        p.constant(k)
    for k in oracles:
        p.oracle(k)
    if unconstrained:
        p.require_unconstrained(name)


def make_rule(name: str, eps: float) -> Rule:
    if name not in RULES:
        raise KeyError(f"unknown rule {name!r}; choose from {', '.join(RULES)}")
    rule = RULES[name][0](eps)
    return rule
