"""Largest-eigenvalue CDF at tiny N by integrating the joint density directly.

The density of ``n`` eigenvalues is ``|Delta(x)|^beta prod w(x_k)`` with
``beta = 1, w = exp(-x^2/2)`` (GOE) or ``beta = 4, w = exp(-x^2)`` (GSE).
On the ordered chamber ``x_1 < ... < x_n`` the Vandermonde factor is a plain
polynomial, so nested Gauss-Legendre rules converge spectrally.  The
normalization is the same integral with the upper limit moved to ``X``.
"""

from __future__ import annotations

import numpy as np

from ..finite_kernels import Ensemble, EnsembleSpec
from ..numerics import gauss_legendre

__all__ = ["smalln_cdf_direct", "ordered_chamber_integral"]

X_CUT = 8.0
MAX_EIGENVALUES = 4


def _weight(ensemble: Ensemble):
    if ensemble is Ensemble.GOE:
        return 1, lambda x: np.exp(-0.5 * x * x)
    return 4, lambda x: np.exp(-x * x)


def ordered_chamber_integral(n: int, t: float, beta: int, weight, m: int = 40,
                             lower: float = -X_CUT) -> float:
    """``int_{lower < x_1 < ... < x_n <= t} Delta(x)^beta prod weight(x_k) dx``."""
    if n == 0:
        return 1.0
    if not t > lower:
        return 0.0
    gt, gw = gauss_legendre(m)
    # outermost variable x_n on (lower, t]
    half = 0.5 * (t - lower)
    pts = [lower + half * (gt + 1.0)]
    wts = half * gw
    for _ in range(n - 1):
        top = pts[-1]
        half = 0.5 * (top - lower)
        new = lower + half[:, None] * (gt[None, :] + 1.0)
        pts = [np.repeat(p, m) for p in pts] + [new.ravel()]
        wts = (wts[:, None] * half[:, None] * gw[None, :]).ravel()
    f = wts.copy()
    for k, xk in enumerate(pts):
        f *= weight(xk)
        for xj in pts[k + 1:]:
            # pts are listed from largest to smallest
            f *= (xk - xj) ** beta
    return float(f.sum())


def smalln_cdf_direct(spec: EnsembleSpec, t: float, m: int = 48) -> float:
    """``P(lambda_max <= t)`` for the ensemble described by ``spec``.

    ``spec.n_eigenvalues`` eigenvalues are integrated: ``N`` for GOE and
    ``(N - 1) / 2`` for GSE.
    """
    n = spec.n_eigenvalues
    if n > MAX_EIGENVALUES:
        raise ValueError(f"direct integration supports at most {MAX_EIGENVALUES} eigenvalues, got {n}")
    if n == 0:
        return 1.0
    beta, w = _weight(spec.ensemble)
    t = min(float(t), X_CUT)
    num = ordered_chamber_integral(n, t, beta, w, m)
    den = ordered_chamber_integral(n, X_CUT, beta, w, m)
    return num / den
