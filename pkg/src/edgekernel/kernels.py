"""Shared kernel containers used by the finite-N and limiting evaluators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def eps(x):
    """``eps(x) = sgn(x) / 2`` with ``eps(0) = 0``."""
    return 0.5 * np.sign(x)


@dataclass(frozen=True)
class MatrixKernelSample:
    """The four entries of a 2x2 matrix kernel at a point pair.

    ``e21`` already contains the ``-eps(x - y)`` term where the ensemble has
    one, and any overall prefactor has been applied.
    """

    e11: float
    e12: float
    e21: float
    e22: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.e11, self.e12], [self.e21, self.e22]], dtype=float)


class MatrixKernel:
    """A 2x2 matrix kernel evaluated block-wise on point grids.

    Subclasses implement :meth:`blocks`, returning the four entry matrices on
    ``x[:, None], y[None, :]`` without the ``eps(x - y)`` term.  The lower-left
    entry of the full kernel is ``blocks[2] - eps_weight * eps(x - y)``; the
    Fredholm module discretizes that term itself.
    """

    name = "matrix"
    eps_weight = 0.0

    def blocks(self, x: np.ndarray, y: np.ndarray):
        raise NotImplementedError

    def truncation(self, s: float, tol: float) -> float:
        raise NotImplementedError

    def __call__(self, x: float, y: float) -> MatrixKernelSample:
        b11, b12, b21, b22 = self.blocks(np.array([float(x)]), np.array([float(y)]))
        e21 = b21[0, 0] - self.eps_weight * eps(float(x) - float(y))
        return MatrixKernelSample(float(b11[0, 0]), float(b12[0, 0]), float(e21), float(b22[0, 0]))
