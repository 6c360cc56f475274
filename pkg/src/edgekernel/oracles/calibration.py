"""Pin the argument convention relating the GSE limit determinant to F4.

Candidates are ``F4(c s)`` for ``c`` in ``{1, sqrt(2), 1/sqrt(2)}``.  A
candidate is accepted when it matches ``gap_matrix(K_GSE, s)`` within the
tolerance at every grid point; the calibration succeeds only if exactly one
candidate is accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from ..fredholm import DetConfig, gap_matrix
from ..limit_kernels import GSELimitKernel
from .painleve import painleve_f4

__all__ = ["CANDIDATES", "CalibrationResult", "calibrate_f4", "read_constants", "write_constants"]

CANDIDATES = {"s": 1.0, "sqrt2*s": math.sqrt(2.0), "s/sqrt2": 1.0 / math.sqrt(2.0)}
DEFAULT_GRID = (-5.0, -3.0, -1.0, 0.0, 1.0, 2.0)


@dataclass
class CalibrationResult:
    grid: tuple
    tol: float
    residuals: dict = field(default_factory=dict)

    @property
    def matching(self) -> list[str]:
        return [k for k, r in self.residuals.items() if r <= self.tol]

    @property
    def ok(self) -> bool:
        return len(self.matching) == 1

    @property
    def convention(self) -> str | None:
        return self.matching[0] if self.ok else None


def calibrate_f4(grid=DEFAULT_GRID, tol: float = 1e-5, cfg: DetConfig = DetConfig()) -> CalibrationResult:
    kernel = GSELimitKernel()
    values = {s: gap_matrix(kernel, s, cfg).sqrt_value for s in grid}
    res = CalibrationResult(tuple(grid), tol)
    for name, c in CANDIDATES.items():
        res.residuals[name] = max(abs(values[s] - painleve_f4(c * s)) for s in grid)
    return res


def write_constants(path, result: CalibrationResult, extra: dict | None = None) -> Path:
    """Write ``key=value`` lines recording the verified convention and residuals."""
    path = Path(path)
    lines = [
        f"f4_argument_convention={result.convention or 'UNRESOLVED'}",
        f"f4_argument_scale={CANDIDATES[result.convention]!r}" if result.ok else "f4_argument_scale=nan",
        f"f4_tolerance={result.tol!r}",
        "f4_grid=" + ",".join(repr(float(s)) for s in result.grid),
    ]
    lines += [f"f4_residual[{k}]={v!r}" for k, v in result.residuals.items()]
    for k, v in (extra or {}).items():
        lines.append(f"{k}={v!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_constants(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#") and "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out
