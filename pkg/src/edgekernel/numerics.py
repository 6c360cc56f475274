"""Quadrature rules, truncation of (s, inf) and dense determinants."""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .specfun import airy_pair, airy_tail

__all__ = [
    "QuadratureGrid",
    "choose_truncation",
    "composite_gauss_legendre",
    "det_lu",
    "gauss_legendre",
    "integration_matrix",
    "legendre_values",
    "map_to_interval",
]

M_MAX = 512


def legendre_values(kmax: int, t) -> np.ndarray:
    """``P_k(t)`` for ``k = 0..kmax``, shape ``(kmax + 1, len(t))``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((kmax + 1, t.size))
    out[0] = 1.0
    if kmax >= 1:
        out[1] = t
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + 1) * t * out[k] - k * out[k - 1]) / (k + 1)
    return out


@functools.lru_cache(maxsize=64)
def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1], ascending and read-only."""
    if int(m) != m or not 1 <= m <= M_MAX:
        raise ValueError(f"node count must be in [1, {M_MAX}], got {m!r}")
    t, w = np.polynomial.legendre.leggauss(int(m))
    # exact symmetry about 0
    t = 0.5 * (t - t[::-1])
    w = 0.5 * (w + w[::-1])
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and positive weights on the truncated interval (s, T]."""

    s: float
    T: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def m(self) -> int:
        return self.nodes.size

    @classmethod
    def gauss(cls, m: int, s: float, T: float) -> "QuadratureGrid":
        return map_to_interval(gauss_legendre(m), s, T)


def map_to_interval(rule, s: float, T: float) -> QuadratureGrid:
    """Affine image of a rule on [-1, 1] onto (s, T]."""
    if not T > s:
        raise ValueError(f"need T > s, got s={s}, T={T}")
    t, w = rule
    half = 0.5 * (T - s)
    nodes = s + half * (np.asarray(t) + 1.0)
    weights = half * np.asarray(w)
    return QuadratureGrid(float(s), float(T), nodes, weights)


def composite_gauss_legendre(a: float, b: float, panel: float = 4.0, m: int = 64):
    """Panels of width at most ``panel`` on [a, b], ``m`` nodes each."""
    npan = max(int(math.ceil((b - a) / panel - 1e-12)), 1)
    edges = np.linspace(a, b, npan + 1)
    t, w = gauss_legendre(m)
    half = 0.5 * np.diff(edges)
    nodes = (edges[:-1] + half)[:, None] + half[:, None] * t[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def integration_matrix(grid: QuadratureGrid) -> np.ndarray:
    """``Q[i, j] = int_s^{x_i} L_j(t) dt`` for the Lagrange basis on the nodes.

    ``Q @ g(nodes)`` is the exact running integral of the interpolating
    polynomial of ``g``.
    """
    m = grid.m
    t, w = gauss_legendre(m)
    P = legendre_values(m, t)
    coef = (2 * np.arange(m) + 1) / 2.0
    J = np.empty((m, m))
    J[0] = t + 1.0
    J[1:] = (P[2 : m + 1] - P[0 : m - 1]) / (2 * np.arange(1, m) + 1)[:, None]
    Q = J.T @ (coef[:, None] * P[:m] * w[None, :])
    return 0.5 * (grid.T - grid.s) * Q


def det_lu(M) -> float:
    """Determinant by LU with partial pivoting; exactly singular input gives 0."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError("determinant needs a non-empty square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0.0):
        return 0.0
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    sign = -1.0 if swaps % 2 else 1.0
    return float(sign * np.prod(diag))


def choose_truncation(s: float, tol: float) -> float:
    """Smallest ``T = s + 4k`` (k >= 2) where the Airy diagonal and tail are < tol."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    floor = max(s + 8.0, 10.0)
    k = 2
    while True:
        T = s + 4.0 * k
        if T >= floor:
            ai, aip = airy_pair(T)
            diag = aip * aip - T * ai * ai
            if diag < tol and airy_tail(T) < tol:
                return float(T)
        k += 1
