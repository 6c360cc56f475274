"""The Airy kernel and the edge-scaled GSE/GOE matrix kernels.

With ``A = Ai``, ``K_A(x, y) = int_0^inf A(x+z) A(y+z) dz`` and
``t(x) = int_x^inf A``:

GSE, all entries halved::

    S  = K_A(x, y) - A(x) t(y) / 2
    SD = -d_y K_A(x, y) - A(x) A(y) / 2
    IS = -int_x^inf K_A(z, y) dz + t(x) t(y) / 2

GOE, lower-left entry ``IS - eps(x - y)``::

    S  = K_A(x, y) + A(x) (1 - t(y)) / 2
    SD = -d_y K_A(x, y) - A(x) A(y) / 2
    IS = -int_x^inf K_A(z, y) dz + (t(y) - t(x) + t(x) t(y)) / 2

The lower-right entry is ``S(y, x)`` in both cases.
"""

from __future__ import annotations

import math

import numpy as np

from .kernels import MatrixKernel, MatrixKernelSample
from .numerics import choose_truncation, composite_gauss_legendre
from .specfun import airy_pair, airy_tail

__all__ = [
    "AiryKernel",
    "GOELimitKernel",
    "GSELimitKernel",
    "airy_matrices",
    "k_airy",
    "k_airy_dy",
    "k_airy_integral",
    "k_airy_tailx",
    "k_gse",
    "k_goe",
]

BRANCH_GAP = 1e-4
# the z-integrands are < 1e-16 once both shifted arguments pass this point
_Z_DECAY_POINT = 16.0
_Z_PANEL = 4.0
_Z_NODES = 64


def _z_rule(lo: float):
    Z = max(_Z_PANEL, _Z_PANEL * math.ceil((_Z_DECAY_POINT - lo) / _Z_PANEL))
    return composite_gauss_legendre(0.0, Z, _Z_PANEL, _Z_NODES)


def _k_airy_array(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    ax, apx = airy_pair(x)
    ay, apy = airy_pair(y)
    h = y - x
    near = np.abs(h) <= BRANCH_GAP
    out = np.empty(x.shape)
    far = ~near
    out[far] = (ax[far] * apy[far] - apx[far] * ay[far]) / (x[far] - y[far])
    if near.any():
        a, ap, xn, hn = ax[near], apx[near], x[near], h[near]
        diag = ap * ap - xn * a * a
        d1 = -0.5 * a * a
        # int_x^inf A A'' = (x A'^2 - x^2 A^2 - A A') / 3
        d2 = (xn * ap * ap - xn * xn * a * a - a * ap) / 3.0
        out[near] = diag + hn * d1 + 0.5 * hn * hn * d2
    return out


def k_airy(x, y):
    """Airy kernel ``(A(x)A'(y) - A'(x)A(y)) / (x - y)``.

    Within ``|x - y| <= 1e-4`` a second-order expansion about the diagonal
    value ``A'(x)^2 - x A(x)^2`` replaces the quotient.
    """
    out = _k_airy_array(x, y)
    return float(out) if out.ndim == 0 else out


def _z_integral(x, y, fx, fy):
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    z, v = _z_rule(float(min(x.min(), y.min())))
    X = x[..., None] + z
    Y = y[..., None] + z
    out = np.sum(fx(X) * fy(Y) * v, axis=-1)
    return float(out) if out.ndim == 0 else out


def k_airy_integral(x, y):
    """``K_A(x, y) = int_0^inf A(x+z) A(y+z) dz``; independent of the quotient."""
    return _z_integral(x, y, lambda X: airy_pair(X)[0], lambda Y: airy_pair(Y)[0])


def k_airy_dy(x, y):
    """``d/dy K_A(x, y) = int_0^inf A(x+z) A'(y+z) dz``."""
    return _z_integral(x, y, lambda X: airy_pair(X)[0], lambda Y: airy_pair(Y)[1])


def k_airy_tailx(x, y):
    """``int_x^inf K_A(z, y) dz = int_0^inf A(y+w) t(x+w) dw``."""
    return _z_integral(x, y, airy_tail, lambda Y: airy_pair(Y)[0])


def airy_matrices(x, y) -> dict[str, np.ndarray]:
    """Airy-kernel building blocks on the outer grid ``x[:, None], y[None, :]``."""
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    z, v = _z_rule(float(min(x.min(), y.min())))
    Xz = x[:, None] + z[None, :]
    Yz = y[:, None] + z[None, :]
    ax_z = airy_pair(Xz)[0]
    tx_z = airy_tail(Xz)
    ay_z, apy_z = airy_pair(Yz)
    ax, apx = airy_pair(x)
    ay, _ = airy_pair(y)
    return {
        "K": _k_airy_array(x[:, None], y[None, :]),
        "Kdy": (ax_z * v) @ apy_z.T,
        "Ktailx": (tx_z * v) @ ay_z.T,
        "Ax": ax,
        "Ay": ay,
        "tx": airy_tail(x),
        "ty": airy_tail(y),
    }


class AiryKernel:
    """Scalar Airy kernel on grids; its Fredholm determinant is F2."""

    name = "airy"

    def __call__(self, x, y) -> np.ndarray:
        return _k_airy_array(np.asarray(x)[:, None], np.asarray(y)[None, :])

    def truncation(self, s: float, tol: float) -> float:
        return choose_truncation(s, tol)


class GSELimitKernel(MatrixKernel):
    name = "gse-limit"
    eps_weight = 0.0

    def blocks(self, x, y):
        a = airy_matrices(x, y)
        Ax, Ay, tx, ty = a["Ax"][:, None], a["Ay"][None, :], a["tx"][:, None], a["ty"][None, :]
        s = a["K"] - 0.5 * Ax * ty
        sd = -a["Kdy"] - 0.5 * Ax * Ay
        is_ = -a["Ktailx"] + 0.5 * tx * ty
        st = a["K"] - 0.5 * tx * Ay
        return 0.5 * s, 0.5 * sd, 0.5 * is_, 0.5 * st

    def truncation(self, s: float, tol: float) -> float:
        return choose_truncation(s, tol)


class GOELimitKernel(MatrixKernel):
    name = "goe-limit"
    eps_weight = 1.0

    def blocks(self, x, y):
        a = airy_matrices(x, y)
        Ax, Ay, tx, ty = a["Ax"][:, None], a["Ay"][None, :], a["tx"][:, None], a["ty"][None, :]
        s = a["K"] + 0.5 * Ax * (1.0 - ty)
        sd = -a["Kdy"] - 0.5 * Ax * Ay
        is_ = -a["Ktailx"] + 0.5 * ((ty - tx) + tx * ty)
        st = a["K"] + 0.5 * Ay * (1.0 - tx)
        return s, sd, is_, st

    def truncation(self, s: float, tol: float) -> float:
        return choose_truncation(s, tol)


def k_gse(x: float, y: float) -> MatrixKernelSample:
    """Limiting GSE matrix kernel at a point pair."""
    return GSELimitKernel()(x, y)


def k_goe(x: float, y: float) -> MatrixKernelSample:
    """Limiting GOE matrix kernel at a point pair, ``eps`` term included."""
    return GOELimitKernel()(x, y)
