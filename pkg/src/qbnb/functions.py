"""Benchmark problems.

* :func:`rastrigin_family` -- ``sum_i alpha_i (1 - cos(theta x_i)) + delta |x|^2``
  on ``[-a, a]^d`` with closed-form oracles and Lipschitz constants.
* :func:`dixon_szego` -- the nine classical Dixon-Szego test functions, built
  as expression trees so the interval engine supplies ``L1, L2, L3``.
* :func:`random_rastrigin_like` -- seeded 3-d Rastrigin-like instances with
  random ``alpha`` in ``[0, 1]^3``.
* :func:`problem_from_expr` -- any expression on a box.

Minimum values stored on the Dixon-Szego problems are the commonly quoted
literature values; ``provenance`` says so. The test-suite re-derives every
value it relies on with a grid search plus local polish.
"""
from __future__ import annotations

import functools
import math
from typing import Sequence

import numpy as np

from . import expr as ex
from .geometry import Box
from .interval import lipschitz_bounds
from .problem import Problem

__all__ = [
    "rastrigin_family", "rastrigin", "rastrigin_expr", "dixon_szego", "DIXON_SZEGO", "random_rastrigin_like",
    "splitmix64_uniforms", "problem_from_expr", "compile_oracles", "shifted_quadratic", "get_problem",
    "PROBLEM_NAMES",
]


# ---------------------------------------------------------------------------
# Rastrigin family

def rastrigin_expr(alpha, theta: float, delta: float) -> ex.Expr:
    xs = ex.variables(len(alpha))
    terms = [a * (1 - ex.cos(theta * x)) for a, x in zip(alpha, xs)]
    body = functools.reduce(ex.add, terms)
    if delta != 0:
        body = body + delta * functools.reduce(ex.add, [x ** 2 for x in xs])
    return body


def rastrigin_family(alpha, theta: float = 2 * math.pi, delta: float = 1.0, a: float = 5.12,
                     name: str | None = None) -> Problem:
    """Rastrigin-type problem with analytic oracles.

    The constants bound the Frobenius norms of the gradient, Hessian and
    third-derivative tensor over ``[-a, a]^d``; ``L3`` holds on all of R^d.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0:
        raise ValueError("alpha must be a non-empty vector")
    if not a > 0:
        raise ValueError("a must be positive")
    d = alpha.size
    na = float(np.linalg.norm(alpha))

    def f(x):
        x = np.asarray(x, dtype=float)
        return float(alpha @ (1 - np.cos(theta * x)) + delta * (x @ x))

    def grad(x):
        x = np.asarray(x, dtype=float)
        return alpha * theta * np.sin(theta * x) + 2 * delta * x

    def hess(x):
        x = np.asarray(x, dtype=float)
        return np.diag(alpha * theta ** 2 * np.cos(theta * x) + 2 * delta)

    interior = delta > 0 and bool(np.all(alpha >= 0))
    return Problem(
        domain=Box(-a * np.ones(d), a * np.ones(d)),
        objective=f,
        gradient=grad,
        hessian=hess,
        L1=na * abs(theta) + 2 * abs(delta) * math.sqrt(d) * a,
        L2=na * theta ** 2 + 2 * abs(delta),
        L3=na * abs(theta) ** 3,
        unconstrained=interior,
        l3_global=True,
        name=name or f"rastrigin{d}",
        f_min=0.0 if interior else None,
        minimizers=(np.zeros(d),) if interior else (),
        provenance="analytic constants; minimizer 0 for delta > 0" if interior else "analytic constants",
        expression=rastrigin_expr(alpha, theta, delta),
        metadata={"alpha": alpha.tolist(), "theta": theta, "delta": delta, "a": a},
    )


def rastrigin(d: int = 2) -> Problem:
    """The standard Rastrigin function: ``alpha_i = 10``, ``theta = 2 pi``,
    ``delta = 1`` on ``[-5.12, 5.12]^d``."""
    return rastrigin_family(np.full(d, 10.0), 2 * math.pi, 1.0, 5.12, name=f"rastrigin{d}")


_MASK64 = (1 << 64) - 1


def splitmix64_uniforms(seed: int, n: int) -> list[float]:
    """``n`` uniforms in [0, 1) from SplitMix64 seeded with ``seed``.

    Each 64-bit output keeps its top 53 bits, so the stream is bit-identical
    on any platform.
    """
    state = seed & _MASK64
    out = []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
        out.append((z >> 11) * 2.0 ** -53)
    return out


def random_rastrigin_like(seed: int, delta: float = 1.0) -> Problem:
    alpha = splitmix64_uniforms(seed, 3)
    kind = "constrained" if delta < 0 else "unconstrained"
    return rastrigin_family(alpha, 2 * math.pi, delta, 5.12, name=f"rastrigin-random-{kind}[{seed}]")


# ---------------------------------------------------------------------------
# expression-backed problems

def compile_oracles(e: ex.Expr, d: int):
    """Objective, gradient and Hessian callables generated from ``e``."""
    f_fn = ex.lambdify(e)
    cache: dict = {}
    g_exprs = [ex.differentiate(e, i, cache) for i in range(d)]
    g_fn = ex.lambdify(g_exprs)
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    h_exprs = [ex.differentiate(g_exprs[i], j, cache) for i, j in pairs]
    h_fn = ex.lambdify(h_exprs)
    slot = {p: k for k, p in enumerate(pairs)}
    gather = np.array([slot[(min(i, j), max(i, j))] for i in range(d) for j in range(d)])

    def f(x):
        return float(f_fn(x))

    def grad(x):
        return np.array(g_fn(x), dtype=float)

    def hess(x):
        return np.array(h_fn(x), dtype=float)[gather].reshape(d, d)

    return f, grad, hess


def problem_from_expr(e: ex.Expr, domain: Box, name: str = "expr", unconstrained: bool = False,
                      f_min: float | None = None, minimizers: Sequence = (), provenance: str = "",
                      orders=(1, 2, 3)) -> Problem:
    """Problem with compiled oracles and interval Lipschitz constants over
    ``domain``."""
    d = domain.dim
    f, grad, hess = compile_oracles(e, d)
    L = lipschitz_bounds(e, domain, orders)
    return Problem(
        domain=domain, objective=f, gradient=grad, hessian=hess,
        L1=L.get(1), L2=L.get(2), L3=L.get(3),
        unconstrained=unconstrained, name=name, f_min=f_min,
        # interval inflation keeps any non-trivial enclosure away from 0, so a
        # zero bound means the third derivatives vanished symbolically: the
        # expression is a polynomial of degree <= 2 and L3 = 0 holds everywhere
        l3_global=L.get(3) == 0.0,
        minimizers=tuple(np.asarray(m, dtype=float) for m in minimizers),
        provenance=provenance or "interval constants", expression=e,
    )


def shifted_quadratic(center: float = 0.3, lower: float = -1.0, upper: float = 1.0) -> Problem:
    """``(x - center)^2`` on ``[lower, upper]``, minimizer ``center``."""
    x = ex.var(0)
    return problem_from_expr((x - center) ** 2, Box([lower], [upper]), name=f"quadratic[{center:g}]",
                             unconstrained=lower < center < upper, f_min=0.0, minimizers=[[center]],
                             provenance="closed form")


def _branin():
    x1, x2 = ex.variables(2)
    b = 5.1 / (4 * math.pi ** 2)
    c = 5 / math.pi
    t = 1 / (8 * math.pi)
    e = (x2 - b * x1 ** 2 + c * x1 - 6) ** 2 + 10 * (1 - t) * ex.cos(x1) + 10
    return e, [(-5, 10), (0, 15)], 0.397887


def _camelback():
    x1, x2 = ex.variables(2)
    e = (4 - 2.1 * x1 ** 2 + x1 ** 4 / 3) * x1 ** 2 + x1 * x2 + (-4 + 4 * x2 ** 2) * x2 ** 2
    return e, [(-3, 3), (-2, 2)], -1.0316285


def _goldstein_price():
    x1, x2 = ex.variables(2)
    a = 1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1 ** 2 - 14 * x2 + 6 * x1 * x2 + 3 * x2 ** 2)
    b = 30 + (2 * x1 - 3 * x2) ** 2 * (18 - 32 * x1 + 12 * x1 ** 2 + 48 * x2 - 36 * x1 * x2 + 27 * x2 ** 2)
    return a * b, [(-2, 2), (-2, 2)], 3.0


def _shubert():
    x1, x2 = ex.variables(2)

    def s(x):
        return functools.reduce(ex.add, [i * ex.cos((i + 1) * x + i) for i in range(1, 6)])

    return s(x1) * s(x2), [(-10, 10), (-10, 10)], -186.7309


_HARTMAN_C = [1.0, 1.2, 3.0, 3.2]
_HARTMAN3_A = [[3.0, 10, 30], [0.1, 10, 35], [3.0, 10, 30], [0.1, 10, 35]]
_HARTMAN3_P = [[0.3689, 0.1170, 0.2673], [0.4699, 0.4387, 0.7470],
               [0.1091, 0.8732, 0.5547], [0.03815, 0.5743, 0.8828]]
_HARTMAN6_A = [[10, 3, 17, 3.5, 1.7, 8], [0.05, 10, 17, 0.1, 8, 14],
               [3, 3.5, 1.7, 10, 17, 8], [17, 8, 0.05, 10, 0.1, 14]]
_HARTMAN6_P = [[0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
               [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
               [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
               [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381]]


def _hartman(A, P, f_min):
    d = len(A[0])
    xs = ex.variables(d)
    terms = []
    for c, a_row, p_row in zip(_HARTMAN_C, A, P):
        inner = functools.reduce(ex.add, [a * (x - p) ** 2 for a, x, p in zip(a_row, xs, p_row)])
        terms.append(c * ex.exp(-inner))
    return -functools.reduce(ex.add, terms), [(0, 1)] * d, f_min


_SHEKEL_A = [[4, 4, 4, 4], [1, 1, 1, 1], [8, 8, 8, 8], [6, 6, 6, 6], [3, 7, 3, 7],
             [2, 9, 2, 9], [5, 5, 3, 3], [8, 1, 8, 1], [6, 2, 6, 2], [7, 3.6, 7, 3.6]]
_SHEKEL_C = [0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5]


def _shekel(m, f_min):
    xs = ex.variables(4)
    terms = []
    for a_row, c in zip(_SHEKEL_A[:m], _SHEKEL_C[:m]):
        denom = functools.reduce(ex.add, [(x - a) ** 2 for x, a in zip(xs, a_row)]) + c
        terms.append(1 / denom)
    return -functools.reduce(ex.add, terms), [(0, 10)] * 4, f_min


DIXON_SZEGO = {
    "branin": _branin,
    "camelback": _camelback,
    "goldstein-price": _goldstein_price,
    "shubert": _shubert,
    "hartman3": lambda: _hartman(_HARTMAN3_A, _HARTMAN3_P, -3.86278),
    "shekel5": lambda: _shekel(5, -10.1532),
    "shekel7": lambda: _shekel(7, -10.4029),
    "shekel10": lambda: _shekel(10, -10.5364),
    "hartman6": lambda: _hartman(_HARTMAN6_A, _HARTMAN6_P, -3.32237),
}


def _norm(name: str) -> str:
    return name.lower().replace("_", "").replace("-", "")


_DS_KEYS = {_norm(k): k for k in DIXON_SZEGO}


def dixon_szego(name: str) -> Problem:
    """One of the nine Dixon-Szego functions on its usual domain.

    All of them attain their global minima in the interior of the domain,
    so they are flagged unconstrained. Problems are built once and cached.
    """
    key = _DS_KEYS.get(_norm(name))
    if key is None:
        raise KeyError(f"unknown Dixon-Szego function {name!r}; choose from {', '.join(DIXON_SZEGO)}")
    return _build_dixon_szego(key)


@functools.lru_cache(maxsize=None)
def _build_dixon_szego(key: str) -> Problem:
    e, bounds, f_min = DIXON_SZEGO[key]()
    return problem_from_expr(e, Box.from_bounds(bounds), name=key, unconstrained=True, f_min=f_min,
                             provenance="literature minimum value; interval constants")


PROBLEM_NAMES = ("rastrigin", "rastrigin-random", "rastrigin-random-constrained", "quadratic",
                 *DIXON_SZEGO)


def get_problem(name: str, dim: int | None = None, seed: int = 0) -> Problem:
    """Look a problem up by its command-line name."""
    key = name.lower().replace("_", "-")
    if key == "rastrigin":
        return rastrigin(dim or 2)
    if key == "rastrigin-random":
        return random_rastrigin_like(seed, 1.0)
    if key == "rastrigin-random-constrained":
        return random_rastrigin_like(seed, -1.0)
    if key == "quadratic":
        return shifted_quadratic()
    if _norm(key) in _DS_KEYS:
        p = dixon_szego(key)
        if dim is not None and dim != p.dim:
            raise ValueError(f"{key} has dimension {p.dim}, not {dim}")
        return p
    raise KeyError(f"unknown function {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
