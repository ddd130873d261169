"""Options and results shared by the Riemannian optimizers."""

import time
from dataclasses import dataclass, field

import numpy as np

STOP_REASONS = ("gradtol", "maxiter", "radius_collapse", "linesearch_failure")


@dataclass
class OptimOptions:
    """Stopping and tuning parameters.

    ``tr_initial_radius`` and ``tr_max_radius`` default to ``sqrt(dim)/8``
    and ``sqrt(dim)`` of the manifold when left as ``None``;
    ``tcg_max_inner`` defaults to the manifold dimension.
    """

    tolgradnorm: float = 1e-7
    max_outer: int = 500
    tr_initial_radius: float = None
    tr_max_radius: float = None
    tcg_max_inner: int = None
    lbfgs_memory: int = 10
    verbosity: int = 0
    min_radius: float = 1e-14

    def __post_init__(self):
        for name in ("tolgradnorm", "max_outer", "lbfgs_memory", "min_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("tr_initial_radius", "tr_max_radius", "tcg_max_inner"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.verbosity < 0:
            raise ValueError("verbosity must be nonnegative")


@dataclass
class SolverSummary:
    """Linear-solve records aggregated over one optimization run.

    ``refinements`` counts the exact tangent corrections applied after
    inexact solves; they are excluded from ``solves`` and the iteration
    average.
    """

    solves: int = 0
    total_iterations: int = 0
    fallbacks: int = 0
    refinements: int = 0
    methods: tuple = ()

    @property
    def avg_iterations(self):
        return self.total_iterations / self.solves if self.solves else 0.0

    @classmethod
    def from_log(cls, records):
        records = list(records)
        refinements = sum(r.method == "refine" for r in records)
        records = [r for r in records if r.method != "refine"]
        return cls(
            solves=len(records),
            total_iterations=int(sum(r.iterations for r in records)),
            fallbacks=int(sum(bool(r.fallback) for r in records)),
            refinements=int(refinements),
            methods=tuple(sorted({f"{r.formulation}/{r.method}" for r in records})),
        )


@dataclass
class OptimResult:
    X: np.ndarray
    cost_trace: list = field(default_factory=list)
    gradnorm_trace: list = field(default_factory=list)
    iterations: int = 0
    stop_reason: str = "maxiter"
    solver_stats: SolverSummary = field(default_factory=SolverSummary)
    wall_time: float = 0.0
    inner_iterations: int = 0

    @property
    def cost(self):
        return self.cost_trace[-1]

    @property
    def gradnorm(self):
        return self.gradnorm_trace[-1]

    @property
    def converged(self):
        return self.stop_reason == "gradtol"


class _RunRecorder:
    """Collects traces, the callback hook and linear-solve statistics."""

    def __init__(self, problem, callback, verbosity, label):
        self.manifold = problem.manifold
        self.callback = callback
        self.verbosity = verbosity
        self.label = label
        self.costs = []
        self.gradnorms = []
        log = getattr(self.manifold, "solver_log", None)
        self._log_start = len(log) if log is not None else 0
        self._t0 = time.perf_counter()

    def record(self, it, cost, gradnorm):
        self.costs.append(float(cost))
        self.gradnorms.append(float(gradnorm))
        if self.verbosity:
            print(f"{self.label} {it:5d}  f = {cost:.6e}  |grad| = {gradnorm:.6e}")
        if self.callback is not None:
            self.callback(it, cost, gradnorm)

    def result(self, X, iterations, stop_reason, inner=0):
        log = getattr(self.manifold, "solver_log", None)
        summary = SolverSummary.from_log(log[self._log_start :]) if log is not None else SolverSummary()
        return OptimResult(
            X=X,
            cost_trace=self.costs,
            gradnorm_trace=self.gradnorms,
            iterations=iterations,
            stop_reason=stop_reason,
            solver_stats=summary,
            wall_time=time.perf_counter() - self._t0,
            inner_iterations=inner,
        )
