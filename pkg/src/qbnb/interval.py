"""Interval evaluation of expression trees and certified Lipschitz constants.

Outward rounding is emulated: every elementary operation widens its result
by a relative ``2**-40`` plus an absolute ``1e-30``. That margin dwarfs the
half-ulp error of one IEEE operation, so the enclosures are sound for the
problem sizes this package targets without touching the FPU rounding mode.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import DomainError
from .geometry import Box

__all__ = ["Interval", "eval_interval", "lipschitz_bound", "lipschitz_bounds", "sampled_derivative_norm"]

REL_INFLATION = 2.0 ** -40
ABS_INFLATION = 1e-30
_TWO_PI = 2 * math.pi
_HALF_PI = math.pi / 2


def _down(v: float) -> float:
    if math.isinf(v):
        return v
    return v - (abs(v) * REL_INFLATION + ABS_INFLATION)


def _up(v: float) -> float:
    if math.isinf(v):
        return v
    return v + (abs(v) * REL_INFLATION + ABS_INFLATION)


class Interval:
    """Closed interval ``[lo, hi]``. Arithmetic results are outward-inflated."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: float | None = None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if not lo <= hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def _out(cls, lo, hi) -> Interval:
        return cls(_down(lo), _up(hi))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other):
        return isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains(self, other: Interval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mag(self) -> float:
        """Largest absolute value in the interval."""
        return max(abs(self.lo), abs(self.hi))

    def __add__(self, other):
        other = _as_interval(other)
        return Interval._out(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_interval(other)
        return Interval._out(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other):
        other = _as_interval(other)
        p = [self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi]
        p = [v for v in p if not math.isnan(v)] or [0.0]
        return Interval._out(min(p), max(p))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_interval(other)
        if other.lo <= 0.0 <= other.hi:
            raise DomainError(f"division by an interval containing zero {other!r}")
        return self * Interval._out(1.0 / other.hi, 1.0 / other.lo)

    def __rtruediv__(self, other):
        return _as_interval(other) / self

    def __pow__(self, n: int):
        n = int(n)
        if n < 0:
            raise ValueError("only non-negative integer powers")
        if n == 0:
            return Interval(1.0)
        if n == 1:
            return self
        lo_n, hi_n = _pow(self.lo, n), _pow(self.hi, n)
        if n % 2:
            return Interval._out(lo_n, hi_n)
        if self.lo >= 0:
            res = Interval._out(lo_n, hi_n)
        elif self.hi <= 0:
            res = Interval._out(hi_n, lo_n)
        else:
            res = Interval._out(0.0, max(lo_n, hi_n))
        return Interval(max(res.lo, 0.0), res.hi)

    def sin(self):
        return _trig(self, math.sin, _HALF_PI, -_HALF_PI)

    def cos(self):
        return _trig(self, math.cos, 0.0, math.pi)

    def exp(self):
        res = Interval._out(_exp(self.lo), _exp(self.hi))
        return Interval(max(res.lo, 0.0), res.hi)

    def sqrt(self):
        if self.lo < 0.0:
            raise DomainError(f"square root of an interval reaching below zero {self!r}")
        res = Interval._out(math.sqrt(self.lo), math.sqrt(self.hi))
        return Interval(max(res.lo, 0.0), res.hi)


def _as_interval(v) -> Interval:
    return v if isinstance(v, Interval) else Interval(v)


def _pow(v: float, n: int) -> float:
    try:
        return v ** n
    except OverflowError:
        return math.copysign(math.inf, v) if n % 2 else math.inf


def _exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _hits(lo: float, hi: float, phase: float) -> bool:
    """Whether ``phase + 2 pi k`` lies in ``[lo, hi]`` for some integer k.

    The test is widened slightly so that rounding can only add, never drop,
    an extremum.
    """
    pad = 1e-12 * (1.0 + max(abs(lo), abs(hi)))
    k = math.ceil((lo - pad - phase) / _TWO_PI)
    return phase + k * _TWO_PI <= hi + pad


def _trig(x: Interval, fn, max_phase: float, min_phase: float) -> Interval:
    if not (math.isfinite(x.lo) and math.isfinite(x.hi)) or x.hi - x.lo >= _TWO_PI:
        return Interval(-1.0, 1.0)
    a, b = fn(x.lo), fn(x.hi)
    lo, hi = min(a, b), max(a, b)
    hi = 1.0 if _hits(x.lo, x.hi, max_phase) else _up(hi)
    lo = -1.0 if _hits(x.lo, x.hi, min_phase) else _down(lo)
    return Interval(max(lo, -1.0), min(hi, 1.0))


def _box_intervals(box) -> list[Interval]:
    if isinstance(box, Box):
        return [Interval(a, b) for a, b in zip(box.lower, box.upper)]
    out = []
    for item in box:
        if isinstance(item, Interval):
            out.append(item)
        else:
            a, b = item
            out.append(Interval(a, b))
    return out


def eval_interval(e: ex.Expr, box) -> Interval:
    """Enclosure of the range of ``e`` over ``box``.

    ``box`` is a :class:`Box` or a sequence of intervals / ``(lo, hi)`` pairs.
    Raises :class:`DomainError` for divisions by intervals containing zero and
    square roots of intervals reaching below zero.
    """
    return eval_interval_many([e], box)[0]


def eval_interval_many(exprs: Sequence[ex.Expr], box) -> list[Interval]:
    xs = _box_intervals(box)
    vals: dict = {}
    for node in ex.postorder(list(exprs)):
        if isinstance(node, ex.Const):
            vals[node] = Interval(node.value)
        elif isinstance(node, ex.Var):
            if node.index >= len(xs):
                raise ValueError(f"variable x{node.index + 1} outside a {len(xs)}-dimensional box")
            vals[node] = xs[node.index]
        elif isinstance(node, ex.IntPow):
            vals[node] = vals[node.base] ** node.exponent
        else:
            a = vals[node.args[0]]
            if isinstance(node, ex.Add):
                vals[node] = a + vals[node.args[1]]
            elif isinstance(node, ex.Sub):
                vals[node] = a - vals[node.args[1]]
            elif isinstance(node, ex.Mul):
                b = vals[node.args[1]]
                # x*x is a square; evaluating it as a product loses the sign information
                vals[node] = a ** 2 if node.args[0] is node.args[1] else a * b
            elif isinstance(node, ex.Div):
                vals[node] = a / vals[node.args[1]]
            elif isinstance(node, ex.Neg):
                vals[node] = -a
            elif isinstance(node, ex.Sin):
                vals[node] = a.sin()
            elif isinstance(node, ex.Cos):
                vals[node] = a.cos()
            elif isinstance(node, ex.Exp):
                vals[node] = a.exp()
            elif isinstance(node, ex.Sqrt):
                vals[node] = a.sqrt()
            else:
                raise TypeError(f"unknown node {type(node).__name__}")
    return [vals[e] for e in exprs]


def lipschitz_bounds(e: ex.Expr, domain: Box, orders=(1, 2, 3)) -> dict[int, float]:
    """Certified ``L_s`` over the whole domain for each requested order.

    ``L_1`` bounds ``||grad f||_2``, ``L_2`` the Frobenius norm of the
    Hessian and ``L_3`` the Frobenius norm of the third-derivative tensor,
    each as the square root of the sum over tensor entries of the squared
    magnitude of that entry's interval enclosure.
    """
    cache: dict = {}
    out = {}
    for order in orders:
        entries = ex.derivative_entries(e, domain.dim, order, cache)
        ivs = eval_interval_many([expr for _, expr, _ in entries], domain)
        total = 0.0
        for (_, _, mult), iv in zip(entries, ivs):
            total += mult * iv.mag ** 2
        out[order] = _up(math.sqrt(total)) if total > 0 else 0.0
    return out


def lipschitz_bound(e: ex.Expr, domain: Box, order: int) -> float:
    return lipschitz_bounds(e, domain, (order,))[order]


def grid_points(domain: Box, n_points: int) -> list[np.ndarray]:
    """Axis grids of a regular lattice with about ``n_points`` nodes."""
    per_axis = max(2, int(round(n_points ** (1.0 / domain.dim))))
    return [np.linspace(a, b, per_axis) for a, b in zip(domain.lower, domain.upper)]


def sampled_derivative_norm(e: ex.Expr, domain: Box, order: int, n_points: int = 10**6,
                            chunk: int = 50_000) -> float:
    """Maximum of the order-``s`` derivative Frobenius norm over a regular grid.

    A lower estimate of the true supremum, used to cross-check
    :func:`lipschitz_bound`.
    """
    entries = ex.derivative_entries(e, domain.dim, order)
    fn = ex.lambdify([expr for _, expr, _ in entries], backend="numpy")
    mults = np.array([m for _, _, m in entries], dtype=float)
    axes = grid_points(domain, n_points)
    shape = tuple(len(a) for a in axes)
    total = int(np.prod(shape))
    best = 0.0
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        idx = np.unravel_index(flat, shape)
        x = np.stack([axes[k][idx[k]] for k in range(domain.dim)])
        vals = fn(x)
        acc = np.zeros(flat.size)
        for m, v in zip(mults, vals):
            acc += m * np.broadcast_to(np.asarray(v, dtype=float), flat.shape) ** 2
        best = max(best, float(np.sqrt(acc.max())))
    return best
