"""Finite-N GSE and GOE matrix kernels and their edge scaling.

For ``N`` wave functions ``phi_0..phi_{N-1}``::

    S_N(x, y)   = sum_n phi_n(x) phi_n(y) + sqrt(N/2) phi_{N-1}(x) (eps phi_N)(y)
    IS_N(x, y)  = sum_n (eps phi_n)(x) phi_n(y) + sqrt(N/2) (eps phi_{N-1})(x) (eps phi_N)(y)
    S_N D(x, y) = -sum_n phi_n(x) phi_n'(y) - sqrt(N/2) phi_{N-1}(x) phi_N(y)

GSE (weight ``exp(-x^2)``, N odd) uses ``K_N = 1/2 [[S_N, S_N D], [IS_N, S_N^T]]``;
GOE (weight ``exp(-x^2/2)``, N even) uses ``[[S_N, S_N D], [IS_N - eps, S_N^T]]``.
A GSE kernel with ``N = 2n + 1`` describes ``n`` eigenvalues; a GOE kernel
with even ``N`` describes ``N`` eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kernels import MatrixKernel, MatrixKernelSample
from .numerics import choose_truncation, composite_gauss_legendre
from .specfun import HermiteTables, hermite_table, phi_half_integral

__all__ = [
    "Ensemble",
    "EnsembleSpec",
    "FiniteKernel",
    "ScalingMap",
    "is_n",
    "is_n_via_identity",
    "kn_matrix",
    "s_n",
    "scaled_kernel",
    "sn0_integral",
    "sn0_sum",
    "snd",
]

N_MAX = 400


class Ensemble(str, Enum):
    GOE = "GOE"
    GSE = "GSE"

    @classmethod
    def coerce(cls, value) -> "Ensemble":
        if isinstance(value, cls):
            return value
        return cls(str(value).upper())


@dataclass(frozen=True)
class EnsembleSpec:
    ensemble: Ensemble
    N: int

    def __post_init__(self):
        object.__setattr__(self, "ensemble", Ensemble.coerce(self.ensemble))
        if int(self.N) != self.N or not 1 <= self.N <= N_MAX:
            raise ValueError(f"N must be an integer in [1, {N_MAX}], got {self.N!r}")
        if self.ensemble is Ensemble.GSE and self.N % 2 == 0:
            raise ValueError("GSE kernel requires odd N (weight exp(-x^2), N odd)")
        if self.ensemble is Ensemble.GOE and self.N % 2 == 1:
            raise ValueError("GOE kernel requires even N (weight exp(-x^2/2), N even)")

    @property
    def n_eigenvalues(self) -> int:
        return (self.N - 1) // 2 if self.ensemble is Ensemble.GSE else self.N

    @property
    def prefactor(self) -> float:
        return 0.5 if self.ensemble is Ensemble.GSE else 1.0


@dataclass(frozen=True)
class ScalingMap:
    """``tau(x) = sqrt(2N) + x / (sqrt(2) N^(1/6))`` and ``tau' = 2^(-1/2) N^(-1/6)``."""

    N: int

    @property
    def tau_shift(self) -> float:
        return math.sqrt(2.0 * self.N)

    @property
    def tau_scale(self) -> float:
        return self.tau_prime

    @property
    def tau_prime(self) -> float:
        return 2.0 ** -0.5 * self.N ** (-1.0 / 6.0)

    def __call__(self, x):
        return self.tau_shift + self.tau_scale * np.asarray(x, dtype=float)

    def inverse(self, t):
        return (np.asarray(t, dtype=float) - self.tau_shift) / self.tau_scale


def _check_N(N: int) -> int:
    if int(N) != N or not 1 <= N <= N_MAX:
        raise ValueError(f"N must be an integer in [1, {N_MAX}], got {N!r}")
    return int(N)


def _tables(N: int, x: np.ndarray, y: np.ndarray):
    tx = HermiteTables.build(N, x)
    ty = tx if x.shape == y.shape and np.array_equal(x, y) else HermiteTables.build(N, y)
    return tx, ty


def _finite_blocks(N: int, x: np.ndarray, y: np.ndarray):
    """(S_N, S_N D, IS_N, S_N^T) on the outer grid, no prefactor and no eps."""
    tx, ty = _tables(N, x, y)
    r = math.sqrt(N / 2.0)
    s0 = tx.phi[:N].T @ ty.phi[:N]
    s = s0 + r * np.outer(tx.phi[N - 1], ty.eps[N])
    st = s0 + r * np.outer(tx.eps[N], ty.phi[N - 1])
    sd = -tx.phi[:N].T @ ty.dphi[:N] - r * np.outer(tx.phi[N - 1], ty.phi[N])
    is_ = tx.eps[:N].T @ ty.phi[:N] + r * np.outer(tx.eps[N - 1], ty.eps[N])
    return s, sd, is_, st


def _point(fn, x, y):
    xa, ya = np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(y, float))
    return float(fn(xa, ya)[0, 0])


def sn0_sum(N: int, x: float, y: float) -> float:
    """``S_N^0(x, y) = sum_{n<N} phi_n(x) phi_n(y)``."""
    N = _check_N(N)

    def fn(xa, ya):
        px, py = hermite_table(N - 1, xa), hermite_table(N - 1, ya)
        return px.T @ py

    return _point(fn, x, y)


def sn0_integral(N: int, x: float, y: float) -> float:
    """``S_N^0`` from its integral representation.

    ``int_0^inf [f(x+z) g(y+z) + g(x+z) f(y+z)] dz`` with
    ``f = (N/2)^(1/4) phi_N`` and ``g = (N/2)^(1/4) phi_{N-1}``.
    """
    N = _check_N(N)
    lo = min(float(x), float(y))
    # phi_N is negligible 12 units past its turning point
    Z = max(4.0, math.sqrt(2.0 * N + 1.0) + 12.0 - lo)
    z, v = composite_gauss_legendre(0.0, Z, 4.0, 64)
    px = hermite_table(N, float(x) + z)
    py = hermite_table(N, float(y) + z)
    c = math.sqrt(N / 2.0)
    integrand = px[N] * py[N - 1] + px[N - 1] * py[N]
    return float(c * np.dot(integrand, v))


def s_n(spec: EnsembleSpec, x: float, y: float) -> float:
    """``S_N(x, y)``."""
    return _point(lambda a, b: _finite_blocks(spec.N, a, b)[0], x, y)


def snd(spec: EnsembleSpec, x: float, y: float) -> float:
    """``S_N D(x, y)``."""
    return _point(lambda a, b: _finite_blocks(spec.N, a, b)[1], x, y)


def is_n(spec: EnsembleSpec, x: float, y: float) -> float:
    """``IS_N(x, y)`` (without the GOE ``-eps(x - y)`` term)."""
    return _point(lambda a, b: _finite_blocks(spec.N, a, b)[2], x, y)


class FiniteKernel(MatrixKernel):
    """``K_N`` for an ensemble, optionally edge-scaled and corner-modified.

    Scaled entries are ``tau' S_N``, ``tau'^2 S_N D``, ``IS_N`` and
    ``tau' S_N^T`` at ``(tau(x), tau(y))``; the GOE ``eps`` term is unchanged
    by the scaling.
    """

    def __init__(self, spec: EnsembleSpec, scaled: bool = True):
        self.spec = spec
        self.scaled = scaled
        self.tau = ScalingMap(spec.N)
        self.eps_weight = 1.0 if spec.ensemble is Ensemble.GOE else 0.0
        self.name = f"{spec.ensemble.value.lower()}-N{spec.N}" + ("-scaled" if scaled else "")

    def blocks(self, x, y):
        x = np.atleast_1d(np.asarray(x, float))
        y = np.atleast_1d(np.asarray(y, float))
        if self.scaled:
            s, sd, is_, st = _finite_blocks(self.spec.N, self.tau(x), self.tau(y))
            tp = self.tau.tau_prime
            s, sd, st = tp * s, tp * tp * sd, tp * st
        else:
            s, sd, is_, st = _finite_blocks(self.spec.N, x, y)
        c = self.spec.prefactor
        return c * s, c * sd, c * is_, c * st

    def truncation(self, s: float, tol: float) -> float:
        if self.scaled:
            return choose_truncation(s, tol)
        return max(s + 8.0, math.sqrt(2.0 * self.spec.N + 1.0) + 8.0)


def kn_matrix(spec: EnsembleSpec, x: float, y: float) -> MatrixKernelSample:
    """Unscaled ``K_N(x, y)``."""
    return FiniteKernel(spec, scaled=False)(x, y)


def scaled_kernel(spec: EnsembleSpec, x: float, y: float) -> MatrixKernelSample:
    """Corner-modified ``tau' K_N(tau(x), tau(y))``."""
    return FiniteKernel(spec, scaled=True)(x, y)


def is_n_via_identity(spec: EnsembleSpec, x: float, y: float) -> float:
    """``IS_N(tau(x), tau(y))`` through the tail functions of the edge scaling.

    With ``Phi(x) = int_x^inf tau' f(tau(z)) dz`` and ``Psi`` likewise for
    ``g`` (``f, g`` as in :func:`sn0_integral`)::

        IS_N = -int_0^inf [Phi(x+z) tau' g_tau(y+z) + Psi(x+z) tau' f_tau(y+z)] dz
               + Psi(x) Phi(y)                                   (GSE)
               + c_f Psi(y) - Psi(x) (c_f - Phi(y))              (GOE)

    where ``c_f = 0.5 int f``.  Used only to cross-check :func:`is_n`.
    """
    N = spec.N
    tau = ScalingMap(N)
    tp = tau.tau_prime
    amp = (N / 2.0) ** 0.25
    lo = min(float(x), float(y))
    Z = max(4.0, 4.0 * math.ceil((16.0 - lo) / 4.0))
    z, v = composite_gauss_legendre(0.0, Z, 4.0, 64)
    tx = HermiteTables.build(N, tau(float(x) + z))
    ty = HermiteTables.build(N, tau(float(y) + z))
    Phi_xz, Psi_xz = amp * tx.tail[N], amp * tx.tail[N - 1]
    f_yz, g_yz = tp * amp * ty.phi[N], tp * amp * ty.phi[N - 1]
    integral = np.dot(Phi_xz * g_yz + Psi_xz * f_yz, v)
    ends = HermiteTables.build(N, tau(np.array([float(x), float(y)])))
    Psi_x, Phi_y, Psi_y = amp * ends.tail[N - 1, 0], amp * ends.tail[N, 1], amp * ends.tail[N - 1, 1]
    if spec.ensemble is Ensemble.GSE:
        return float(-integral + Psi_x * Phi_y)
    c_f = amp * phi_half_integral(N)
    return float(-integral + c_f * Psi_y - Psi_x * (c_f - Phi_y))
