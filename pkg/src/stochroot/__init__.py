"""Stochastic p-th roots of stochastic matrices by Riemannian optimization.

The main entry points are :func:`compute_root` and the scikit-learn style
:class:`StochasticRoot` estimator. Search spaces live in
:mod:`stochroot.manifolds`, the optimizers in :mod:`stochroot.optimize`.
"""

__version__ = "0.1.0"

from .core import residual_fro, stationary_distribution
from .estimator import StochasticRoot
from .linsolve import SolverOptions
from .manifolds import FixedStationaryManifold, MultinomialManifold
from .matrixgen import GeneratorSpec, generate
from .optimize import OptimOptions, rlbfgs, trust_region
from .problem import PthRootProblem
from .roots import compute_root, credit_risk_root
from .sinkhorn import modified_sinkhorn, sinkhorn_balance

__all__ = [
    "__version__",
    "StochasticRoot",
    "compute_root",
    "credit_risk_root",
    "PthRootProblem",
    "MultinomialManifold",
    "FixedStationaryManifold",
    "OptimOptions",
    "SolverOptions",
    "GeneratorSpec",
    "generate",
    "trust_region",
    "rlbfgs",
    "stationary_distribution",
    "residual_fro",
    "sinkhorn_balance",
    "modified_sinkhorn",
]
