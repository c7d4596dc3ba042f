"""Axis-aligned cubes and boxes.

A :class:`Cube` is stored as center plus half-edge vector, the form every
bounding rule consumes. A :class:`Box` is the lower/upper corner form used
for the search domain. The two convert into each other exactly up to float
rounding of ``(lo + hi) / 2``.

Every cube carries a ``path_id``: the bisection history packed into an int
with a leading sentinel bit, so the root is ``1``, its lower child ``0b10``
and its upper child ``0b11``. Within one generation of the breadth-first
search all cubes have the same depth, so integer order equals lexicographic
order of the bit strings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Box", "Cube", "radius", "bisect_longest", "ball2r_inside", "contraction_factor"]


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size == 0:
            raise ValueError("lower and upper must be non-empty vectors of equal length")
        if np.any(lo > hi):
            raise ValueError("box needs lower <= upper in every coordinate")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @classmethod
    def from_bounds(cls, bounds) -> Box:
        """Build from a sequence of ``(lo, hi)`` pairs."""
        bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
        return cls(bounds[:, 0], bounds[:, 1])

    def to_cube(self) -> Cube:
        return Cube((self.lower + self.upper) / 2, (self.upper - self.lower) / 2)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __repr__(self):
        pairs = ", ".join(f"[{a:g}, {b:g}]" for a, b in zip(self.lower, self.upper))
        return f"Box({pairs})"


class Cube:
    """Immutable axis-aligned cube ``{x : |x_i - center_i| <= half_edge_i}``."""

    __slots__ = ("center", "half_edge", "path_id", "radius")

    def __init__(self, center, half_edge, path_id: int = 1):
        c = np.atleast_1d(np.asarray(center, dtype=float))
        h = np.atleast_1d(np.asarray(half_edge, dtype=float))
        if c.shape != h.shape or c.ndim != 1 or c.size == 0:
            raise ValueError("center and half_edge must be non-empty vectors of equal length")
        if not np.all(h > 0):
            raise ValueError("half_edge entries must be strictly positive")
        c.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_edge", h)
        object.__setattr__(self, "path_id", int(path_id))
        object.__setattr__(self, "radius", math.sqrt(float(h @ h)))

    def __setattr__(self, name, value):
        raise AttributeError("Cube is immutable")

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def depth(self) -> int:
        return self.path_id.bit_length() - 1

    @property
    def path_bits(self) -> tuple[int, ...]:
        """Bisection history, 0 = lower half, 1 = upper half."""
        return tuple(int(b) for b in bin(self.path_id)[3:])

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.half_edge

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.half_edge

    def to_box(self) -> Box:
        return Box(self.lower, self.upper)

    def contains(self, x, tol: float = 0.0) -> bool:
        d = np.abs(np.asarray(x, dtype=float) - self.center)
        return bool(np.all(d <= self.half_edge + tol))

    def __eq__(self, other):
        if not isinstance(other, Cube):
            return NotImplemented
        return (
            np.array_equal(self.center, other.center)
            and np.array_equal(self.half_edge, other.half_edge)
            and self.path_id == other.path_id
        )

    __hash__ = None

    def __repr__(self):
        return f"Cube(center={self.center.tolist()}, half_edge={self.half_edge.tolist()}, path={bin(self.path_id)[3:] or '-'})"

    def __reduce__(self):
        return (Cube, (np.array(self.center), np.array(self.half_edge), self.path_id))


def radius(cube: Cube) -> float:
    return cube.radius


def bisect_longest(cube: Cube) -> tuple[Cube, Cube]:
    """Split along the longest edge, ties going to the lowest index.

    The split coordinate of each child is recomputed from the parent's
    corners so that the children share the face ``center[k]`` exactly.
    """
    h = cube.half_edge
    k = int(np.argmax(h))
    half = h.copy()
    half[k] = h[k] / 2
    lo = cube.center.copy()
    hi = cube.center.copy()
    lo[k] = cube.center[k] - half[k]
    hi[k] = cube.center[k] + half[k]
    pid = cube.path_id << 1
    return Cube(lo, half, pid), Cube(hi, half, pid | 1)


def ball2r_inside(cube: Cube, domain: Box) -> bool:
    """True iff the closed ball of radius ``2 r`` around the center, checked
    coordinate-wise, stays inside ``domain``."""
    two_r = 2.0 * cube.radius
    c = cube.center
    return bool(np.all(c - two_r >= domain.lower) and np.all(c + two_r <= domain.upper))


def contraction_factor(d: int) -> float:
    """Worst-case ratio of child to parent radius under longest-edge bisection."""
    return math.sqrt((d - 0.75) / d)
