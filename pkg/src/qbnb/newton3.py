"""Third order quasi-lower bound from certified Newton iterations.

For a cube with center ``x0`` and radius ``r`` the procedure

1. rejects the cube outright when ``lambda_min(H(x0)) < -L3 r``;
2. runs Newton on ``f(x) + lam/2 |x - x0|^2`` with
   ``lam = max(0, 5 L3 r - lambda_min(H(x0)))`` and checks every step against
   the radius sequence ``r_0 = r, r_{k+1} = r_k^2 / (2 r)``;
3. stops once ``M/2 r_K^2 <= eps_newton`` and returns
   ``fhat(x_K) - lam/2 r^2 - eps_newton``.

Any failed check proves the cube holds no global minimizer, so the cube is
reported eliminated (quasi-bound ``+inf``).
"""
from __future__ import annotations

import math

import numpy as np

from .geometry import Cube, ball2r_inside
from .linalg import NotPositiveDefinite, cholesky_solve, eig_extremes
from .problem import Problem, RuleOutcome

__all__ = ["rule_qbnb3", "newton_radii", "regularizer_weight", "NEWTON_FRACTION", "MAX_NEWTON_STEPS"]

NEWTON_FRACTION = 1.0 / 200  # eps_newton = eps / 200
MAX_NEWTON_STEPS = 100
PIVOT_TOL = 1e-14


def regularizer_weight(lam_min: float, L3: float, r: float) -> float:
    return max(0.0, 5.0 * L3 * r - lam_min)


def newton_radii(r: float, n: int) -> list[float]:
    """First ``n`` certified radii. ``r_{k+1} = r_k^2/(2r)`` is the recursion
    with the strong convexity modulus ``3 L3 r`` already substituted, which
    keeps it defined at ``L3 = 0``."""
    out = [r]
    for _ in range(n - 1):
        out.append(out[-1] ** 2 / (2 * r))
    return out


def rule_qbnb3(p: Problem, c: Cube, eps: float, check_ball: bool = True) -> RuleOutcome:
    grad = p.oracle("gradient")
    hess = p.oracle("hessian")
    L3 = p.constant("L3")
    p.require_unconstrained("qbnb3")
    x0 = c.center
    r = c.radius
    if check_ball and not p.l3_global and not ball2r_inside(c, p.domain):
        return RuleOutcome.unbounded(x0)

    slack = 1e-12 * (1.0 + r)
    h0 = hess(x0)
    lam_min, lam_max = eig_extremes(h0)
    if lam_min < -L3 * r - slack:
        return RuleOutcome.eliminated(x0, n_hess=1, order=3)

    lam = regularizer_weight(lam_min, L3, r)
    curvature_cap = lam_max + lam + 2.0 * L3 * r
    eps_newton = eps * NEWTON_FRACTION
    eye = np.eye(x0.size)

    x = x0
    rk = r
    k = 0
    n_grad = 0
    n_hess = 1
    while curvature_cap / 2 * rk * rk > eps_newton:
        if k >= MAX_NEWTON_STEPS:
            return RuleOutcome.unbounded(x0, n_grad=n_grad, n_hess=n_hess, n_newton=k, order=3, regularizer=lam)
        g = grad(x) + lam * (x - x0)
        n_grad += 1
        if k == 0:
            h = h0 + lam * eye
        else:
            h = hess(x) + lam * eye
            n_hess += 1
        try:
            step = cholesky_solve(h, -g, PIVOT_TOL)
        except NotPositiveDefinite:
            # under the minimizer hypothesis h >= 3 L3 r I; only a margin well
            # above the pivot threshold turns the failure into a certificate
            if 3.0 * L3 * r > 1e-12 * math.sqrt(float(np.sum(h * h))):
                return RuleOutcome.eliminated(x0, n_grad=n_grad, n_hess=n_hess, n_newton=k, order=3, regularizer=lam)
            return RuleOutcome.unbounded(x0, n_grad=n_grad, n_hess=n_hess, n_newton=k, order=3, regularizer=lam)
        x_next = x + step
        r_next = rk * rk / (2.0 * r)
        if (np.linalg.norm(x_next - x) > rk + r_next + slack
                or np.linalg.norm(x_next - x0) > r_next + r + slack):
            return RuleOutcome.eliminated(x0, n_grad=n_grad, n_hess=n_hess, n_newton=k + 1, order=3, regularizer=lam)
        x = x_next
        rk = r_next
        k += 1

    fx = float(p.objective(x))
    dx = x - x0
    fhat = fx + lam / 2 * float(dx @ dx)
    qlb = fhat - lam / 2 * r * r - eps_newton
    return RuleOutcome(qlb, x, f_sample=fx, n_f=1, n_grad=n_grad, n_hess=n_hess, n_newton=k,
                       order=3, regularizer=lam)
