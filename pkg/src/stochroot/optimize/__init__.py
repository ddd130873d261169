"""Riemannian optimizers over the stochastic-matrix manifolds."""

from .options import OptimOptions, OptimResult, SolverSummary
from .rlbfgs import rlbfgs
from .trust_region import trust_region, truncated_cg

OPTIMIZERS = {"tr": trust_region, "lbfgs": rlbfgs}

__all__ = ["OptimOptions", "OptimResult", "SolverSummary", "trust_region", "truncated_cg", "rlbfgs", "OPTIMIZERS"]
