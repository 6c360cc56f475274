"""Independent checks: direct small-N integration, Painleve II, Monte Carlo."""

from .montecarlo import McConfig, mc_edge_cdf
from .painleve import painleve_f1, painleve_f2, painleve_f4
from .smalln import smalln_cdf_direct

__all__ = ["McConfig", "mc_edge_cdf", "painleve_f1", "painleve_f2", "painleve_f4", "smalln_cdf_direct"]
