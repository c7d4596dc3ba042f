"""Small dense symmetric linear algebra: Jacobi eigenvalues and Cholesky solves.

Matrices here are Hessians of problems with d <= ~20, so plain cyclic
Jacobi sweeps are fast enough and keep the routine self-contained.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["symmetric_eigenvalues", "eig_extremes", "cholesky", "cholesky_solve", "NotPositiveDefinite"]


class NotPositiveDefinite(ArithmeticError):
    pass


def symmetric_eigenvalues(a, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix in ascending order.

    Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
    ``tol * ||a||_F``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("expected a square matrix")
    if n == 1:
        return a.diagonal().copy()
    a = (a + a.T) / 2
    target = tol * math.sqrt(float(np.sum(a * a)))
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)) * 2)
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    # rotation angle underflows; the entry is negligible
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = diff / (2 * apq)
                if abs(theta) > 1e150:
                    t = 1 / (2 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
    return np.sort(a.diagonal())


def eig_extremes(a) -> tuple[float, float]:
    """``(lambda_min, lambda_max)`` from a single decomposition."""
    w = symmetric_eigenvalues(a)
    return float(w[0]), float(w[-1])


def cholesky(a, pivot_tol: float = 1e-14) -> np.ndarray:
    """Lower triangular factor of a symmetric positive definite matrix.

    Raises :class:`NotPositiveDefinite` when a pivot falls below
    ``pivot_tol * ||a||_F``.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    threshold = pivot_tol * math.sqrt(float(np.sum(a * a)))
    low = np.zeros((n, n))
    for j in range(n):
        pivot = a[j, j] - float(low[j, :j] @ low[j, :j])
        if not pivot > threshold:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} at column {j}")
        ljj = math.sqrt(pivot)
        low[j, j] = ljj
        if j + 1 < n:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / ljj
    return low


def cholesky_solve(a, b, pivot_tol: float = 1e-14) -> np.ndarray:
    low = cholesky(a, pivot_tol)
    b = np.asarray(b, dtype=float)
    n = b.size
    y = np.empty(n)
    for i in range(n):
        y[i] = (b[i] - float(low[i, :i] @ y[:i])) / low[i, i]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - float(low[i + 1:, i] @ x[i + 1:])) / low[i, i]
    return x
