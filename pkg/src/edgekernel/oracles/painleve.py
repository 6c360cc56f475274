"""Edge distributions F1, F2, F4 from the Hastings-McLeod solution of Painleve II.

``q'' = s q + 2 q^3`` with ``q ~ Ai(s)`` as ``s -> +inf``.  Alongside ``q``
the system carries ``U(s) = int_s^inf (x - s) q^2``, ``u(s) = int_s^inf q^2``
and ``v(s) = int_s^inf q`` so that::

    F2 = exp(-U),  F1 = sqrt(F2) exp(-v/2),  F4 = sqrt(F2) cosh(v/2)

Shooting leftwards amplifies rounding like ``exp((2 sqrt2 / 3) |s|^(3/2))``,
so the solution is integrated as an initial value problem from ``s0 = 8``
down to ``S_MATCH = 0`` only.  Left of that, a boundary value problem pinned
by the shooting state at ``S_MATCH`` and by the asymptotic series
``q ~ sqrt(-s/2) (1 + 1/(8 s^3) - 73/(128 s^6) + ...)`` at ``S_LEFT`` keeps
the solution on the Hastings-McLeod branch.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_bvp, solve_ivp

from ..specfun import airy_pair, airy_tail

__all__ = [
    "PainleveError",
    "PainleveSolution",
    "painleve_f1",
    "painleve_f2",
    "painleve_f4",
    "painleve_q",
    "solve_hastings_mcleod",
]

S0 = 8.0
S_MATCH = 0.0
S_LEFT = -12.0
S_MIN = -10.0
RTOL = 1e-13
ATOL = 1e-20
BVP_TOL = 1e-11


class PainleveError(ArithmeticError):
    """Integration left the Hastings-McLeod branch."""


def _airy_integrals(s: float) -> tuple[float, float, float, float, float]:
    # q ~ Ai to O(Ai^3) for s >= S0
    a, ap = (float(v) for v in airy_pair(s))
    u = ap * ap - s * a * a
    U = (2 * s * s * a * a - 2 * s * ap * ap - a * ap) / 3.0
    return a, ap, U, u, float(airy_tail(s))


def q_asymptotic(s):
    """Hastings-McLeod expansion for ``s -> -inf``."""
    s = np.asarray(s, dtype=float)
    return np.sqrt(-s / 2) * (1 + 1 / (8 * s ** 3) - 73 / (128 * s ** 6) + 10657 / (1024 * s ** 9))


def _rhs(s, y):
    q, qp, U, u, v = y
    return np.array([qp, s * q + 2.0 * q ** 3, -u, -q * q, -q])


def _check_branch(q: np.ndarray) -> None:
    if np.any(~np.isfinite(q)) or np.any(q <= 0) or np.max(q) > 10.0:
        raise PainleveError("solution left the Hastings-McLeod branch")


@dataclass(frozen=True)
class PainleveSolution:
    s_grid: np.ndarray
    q_values: np.ndarray
    U: np.ndarray
    v: np.ndarray
    right: object
    left: object

    def state(self, s: float) -> tuple[float, float, float]:
        """``(q, U, v)`` at ``s``."""
        if s >= S0:
            q, _, U, _, v = _airy_integrals(s)
            return q, U, v
        if s < S_MIN:
            raise ValueError(f"s must be >= {S_MIN}, got {s}")
        y = self.right(s) if s >= S_MATCH else self.left(s)
        return float(y[0]), float(y[2]), float(y[4])


@functools.lru_cache(maxsize=1)
def solve_hastings_mcleod() -> PainleveSolution:
    ivp = solve_ivp(_rhs, (S0, S_MATCH), list(_airy_integrals(S0)), method="DOP853",
                    rtol=RTOL, atol=ATOL, dense_output=True)
    if not ivp.success:
        raise PainleveError(ivp.message)
    _check_branch(ivp.y[0])
    y_match = ivp.y[:, -1]

    def bc(ya, yb):
        return np.array([ya[0] - q_asymptotic(S_LEFT), yb[0] - y_match[0],
                         yb[2] - y_match[2], yb[3] - y_match[3], yb[4] - y_match[4]])

    mesh = np.linspace(S_LEFT, S_MATCH, 300)
    guess = np.zeros((5, mesh.size))
    guess[0] = q_asymptotic(np.minimum(mesh, -3.0))
    bvp = solve_bvp(_rhs, bc, mesh, guess, tol=BVP_TOL, bc_tol=1e-13, max_nodes=100_000)
    if bvp.status != 0:
        raise PainleveError(bvp.message)
    _check_branch(bvp.y[0])
    s_grid = np.concatenate([bvp.x, ivp.t[::-1][1:]])
    ys = np.concatenate([bvp.y, ivp.y[:, ::-1][:, 1:]], axis=1)
    return PainleveSolution(s_grid, ys[0], ys[2], ys[4], ivp.sol, bvp.sol)


def painleve_q(s: float) -> float:
    return solve_hastings_mcleod().state(float(s))[0]


def painleve_f2(s: float) -> float:
    _, U, _ = solve_hastings_mcleod().state(float(s))
    return math.exp(-U)


def painleve_f1(s: float) -> float:
    _, U, v = solve_hastings_mcleod().state(float(s))
    return math.exp(-0.5 * U - 0.5 * v)


def painleve_f4(s: float) -> float:
    _, U, v = solve_hastings_mcleod().state(float(s))
    return math.exp(-0.5 * U) * math.cosh(0.5 * v)
