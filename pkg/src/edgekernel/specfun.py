"""Special functions behind the edge kernels.

Airy function values come from ``scipy.special.airy``; the Airy tail
integral, the harmonic oscillator wave functions and their tail integrals
are computed here with recurrences that stay finite for large orders.

Conventions
-----------
``phi_n(x) = (2**n n! sqrt(pi))**-0.5 H_n(x) exp(-x**2/2)`` (orthonormal on R).
``I_n(x) = int_x^inf phi_n(t) dt`` and ``(eps phi_n)(x) = c_n - I_n(x)`` with
``c_n = 0.5 * int_R phi_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "HERMITE_NMAX",
    "HermiteTables",
    "airy_ai",
    "airy_ai_prime",
    "airy_pair",
    "airy_tail",
    "eps_phi",
    "hermite_phi",
    "hermite_phi_deriv",
    "hermite_phi_tail",
    "hermite_table",
    "phi_half_integral",
]

HERMITE_NMAX = 2000

_PI_QUARTER = math.pi ** -0.25
_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)

# 8-point rule on panels of width <= 0.5 resolves Ai to ~1e-16 even at x = -200
_TAIL_PANEL = 0.5
_TAIL_NODES, _TAIL_WEIGHTS = np.polynomial.legendre.leggauss(8)
# beyond this offset past max(x, 0) the remaining tail is < 1e-20
_TAIL_ANCHOR = 16.0


def _as_float_array(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("argument must be finite")
    return arr


def _unwrap(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def airy_pair(x) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Ai(x), Ai'(x))`` for array input."""
    ai, aip, _, _ = special.airy(_as_float_array(x))
    return ai, aip


def airy_ai(x):
    """Airy function Ai."""
    return _unwrap(airy_pair(x)[0], x)


def airy_ai_prime(x):
    """Derivative Ai'."""
    return _unwrap(airy_pair(x)[1], x)


def airy_tail(x):
    """Tail integral ``int_x^inf Ai(t) dt``.

    All requested points are sorted and the integral is accumulated from a
    far anchor leftwards over the gaps between consecutive points, so a
    batch of many nearby points costs little more than a single point.
    """
    arr = _as_float_array(x)
    flat = arr.ravel()
    if flat.size == 0:
        return arr.copy()
    anchor = max(float(flat.max()), 0.0) + _TAIL_ANCHOR
    pts = np.unique(np.append(flat, anchor))
    a, b = pts[:-1], pts[1:]
    nsub = np.maximum(np.ceil((b - a) / _TAIL_PANEL).astype(int), 1)
    width = np.repeat((b - a) / nsub, nsub)
    offsets = np.arange(nsub.sum()) - np.repeat(np.cumsum(nsub) - nsub, nsub)
    left = np.repeat(a, nsub) + offsets * width
    half = 0.5 * width
    nodes = (left + half)[:, None] + half[:, None] * _TAIL_NODES[None, :]
    ai = special.airy(nodes)[0]
    pieces = (ai @ _TAIL_WEIGHTS) * half
    gaps = np.add.reduceat(pieces, np.cumsum(nsub) - nsub)
    tails = np.append(np.cumsum(gaps[::-1])[::-1], 0.0)
    out = tails[np.searchsorted(pts, flat)].reshape(arr.shape)
    return _unwrap(out, x)


def _check_order(n: int) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"Hermite order must be a non-negative integer, got {n!r}")
    if n > HERMITE_NMAX:
        raise ValueError(f"Hermite order {n} exceeds supported maximum {HERMITE_NMAX}")
    return int(n)


def hermite_table(nmax: int, x) -> np.ndarray:
    """Values ``phi_n(x)`` for ``n = 0..nmax``, shape ``(nmax + 1, *x.shape)``.

    The three-term recurrence is run on ``phi_n * exp(x**2/2)`` with a running
    logarithmic scale, so neither the Gaussian factor nor the polynomial
    growth can under- or overflow before they are recombined.
    """
    nmax = _check_order(nmax)
    arr = _as_float_array(x)
    flat = arr.ravel()
    out = np.empty((nmax + 1, flat.size))
    logscale = -0.5 * flat * flat
    p_prev = np.zeros_like(flat)
    p = np.full_like(flat, _PI_QUARTER)

    def emit(vals, scale):
        with np.errstate(divide="ignore"):
            return np.sign(vals) * np.exp(np.log(np.abs(vals)) + scale)

    out[0] = emit(p, logscale)
    for n in range(nmax):
        p_next = math.sqrt(2.0 / (n + 1)) * flat * p - math.sqrt(n / (n + 1)) * p_prev
        p_prev, p = p, p_next
        big = np.abs(p) > _RESCALE
        if big.any():
            p[big] /= _RESCALE
            p_prev[big] /= _RESCALE
            logscale[big] += _LOG_RESCALE
        out[n + 1] = emit(p, logscale)
    return out.reshape((nmax + 1,) + arr.shape)


def _deriv_from_table(phi: np.ndarray, x: np.ndarray) -> np.ndarray:
    # ladder identity phi_n' = -x phi_n + sqrt(2n) phi_{n-1}
    d = -x * phi
    n = np.arange(1, phi.shape[0]).reshape((-1,) + (1,) * (phi.ndim - 1))
    d[1:] += np.sqrt(2.0 * n) * phi[:-1]
    return d


def _tail_from_table(phi: np.ndarray, x: np.ndarray) -> np.ndarray:
    tail = np.empty_like(phi)
    tail[0] = _PI_QUARTER * math.sqrt(math.pi / 2) * special.erfc(x / math.sqrt(2.0))
    if phi.shape[0] > 1:
        tail[1] = math.sqrt(2.0) * phi[0]
    for n in range(1, phi.shape[0] - 1):
        tail[n + 1] = math.sqrt(2.0 / (n + 1)) * phi[n] + math.sqrt(n / (n + 1)) * tail[n - 1]
    return tail


def phi_half_integral(n: int) -> float:
    """``c_n = 0.5 * int_R phi_n``; zero for odd ``n``.

    Uses ``int phi_{n+1} = sqrt(n/(n+1)) int phi_{n-1}`` starting from
    ``int phi_0 = sqrt(2) pi**0.25``.
    """
    n = _check_order(n)
    if n % 2:
        return 0.0
    total = math.sqrt(2.0) * math.pi ** 0.25
    for k in range(1, n // 2 + 1):
        total *= math.sqrt((2 * k - 1) / (2 * k))
    return 0.5 * total


def _half_integrals(nmax: int) -> np.ndarray:
    c = np.zeros(nmax + 1)
    total = math.sqrt(2.0) * math.pi ** 0.25
    c[0] = 0.5 * total
    for n in range(2, nmax + 1, 2):
        total *= math.sqrt((n - 1) / n)
        c[n] = 0.5 * total
    return c


@dataclass(frozen=True)
class HermiteTables:
    """All per-order quantities at a fixed set of points.

    Arrays have shape ``(nmax + 1, len(x))`` and are read-only.
    """

    x: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    tail: np.ndarray
    eps: np.ndarray

    @classmethod
    def build(cls, nmax: int, x) -> "HermiteTables":
        xs = np.atleast_1d(_as_float_array(x)).ravel()
        phi = hermite_table(nmax, xs)
        dphi = _deriv_from_table(phi, xs)
        tail = _tail_from_table(phi, xs)
        eps = _half_integrals(nmax)[:, None] - tail
        for a in (xs, phi, dphi, tail, eps):
            a.flags.writeable = False
        return cls(xs, phi, dphi, tail, eps)

    @property
    def nmax(self) -> int:
        return self.phi.shape[0] - 1


def _single(n: int, x, field: str):
    n = _check_order(n)
    arr = _as_float_array(x)
    tables = HermiteTables.build(n, arr.ravel())
    return _unwrap(getattr(tables, field)[n].reshape(arr.shape), x)


def hermite_phi(n: int, x):
    """Harmonic oscillator wave function ``phi_n(x)``."""
    return _single(n, x, "phi")


def hermite_phi_deriv(n: int, x):
    """``phi_n'(x)`` via the ladder identity."""
    return _single(n, x, "dphi")


def hermite_phi_tail(n: int, x):
    """``I_n(x) = int_x^inf phi_n(t) dt``."""
    return _single(n, x, "tail")


def eps_phi(n: int, x):
    """``(eps phi_n)(x) = int 0.5 sgn(x - t) phi_n(t) dt``."""
    return _single(n, x, "eps")
