"""Positive stochastic matrices sharing a fixed stationary distribution.

The manifold is ``{S > 0 : S 1 = 1, pi^T S = pi^T}`` with the Fisher
metric. Its tangent space at ``S`` is ``{xi : xi 1 = 0, pi^T xi = 0}``
and the Fisher-normal space is ``{(a 1^T + pi b^T) * S}``; projections
therefore need the solution of the singular system handled in
:mod:`stochroot.linsolve`.
"""

import numpy as np

from .. import linsolve
from ..exceptions import (
    BreakdownNullStartError,
    NotConvergedError,
    RetractionOverflowError,
    SingularFactorizationError,
    StepTooLargeError,
)
from ..sinkhorn import modified_sinkhorn
from ..validation import check_probability_vector
from .base import Manifold, as_generator
from .multinomial import MAX_EXPONENT, POSITIVITY_FLOOR

#: Relative tangent-feasibility threshold that triggers the exact correction.
FEASIBILITY_TOL = 1e-10
#: Sinkhorn tolerance used inside retractions and random points.
SINKHORN_TOL = 1e-12
#: Sweep budget inside retractions; a step that needs more is rejected.
RETRACTION_SWEEPS = 1000


class FixedStationaryManifold(Manifold):
    """Stochastic matrices with stationary distribution ``pi``.

    Parameters
    ----------
    pi : array_like, shape (n,)
        Strictly positive probability vector.
    solver_options : SolverOptions, optional
        How the projection systems are solved.
    retraction : {"exp", "linear"}
        ``"exp"`` is ``Sinkhorn(S * exp(xi / S))``; ``"linear"`` is ``S + xi``.
    sinkhorn_max_iter : int
        Sweep budget of the scaling inside :meth:`retract_exp`. Steps that
        need more raise ``NotConvergedError``, which the optimizers treat
        as a rejected step.

    Attributes
    ----------
    solver_log : list of SolveStats
        One record per linear solve, appended in call order.
    """

    name = "fixed_stationary"

    def __init__(self, pi, solver_options=None, retraction="exp", sinkhorn_max_iter=RETRACTION_SWEEPS):
        pi = check_probability_vector(pi)
        super().__init__(pi.shape[0])
        self.pi = pi
        self.solver_options = solver_options or linsolve.SolverOptions()
        if retraction not in ("exp", "linear"):
            raise ValueError("retraction must be 'exp' or 'linear'")
        self.retraction = retraction
        self.sinkhorn_max_iter = sinkhorn_max_iter
        self.solver_log = []
        self._sys = (None, None)
        self._grad_ab = (None, None, None)

    @property
    def dim(self):
        return (self.n - 1) ** 2

    # -- linear algebra -------------------------------------------------

    def system(self, S):
        """Projection system at ``S``; rebuilt whenever ``S`` is a new array."""
        cached_S, sys = self._sys
        if cached_S is not S:
            sys = linsolve.ProjectionSystem(S, self.pi)
            self._sys = (S, sys)
        return sys

    def _direct(self, sys, c, d):
        try:
            ab = linsolve.solve_block_desingularized(sys, c, d)
        except SingularFactorizationError:
            ab = linsolve.solve_block_lstsq(sys, c, d)
        return ab

    def _solve(self, S, c, d):
        sys = self.system(S)
        try:
            ab = linsolve.solve(sys, c, d, self.solver_options)
        except (NotConvergedError, BreakdownNullStartError, SingularFactorizationError):
            ab = self._direct(sys, c, d)
            ab.stats.fallback = True
        self.solver_log.append(ab.stats)
        return ab

    def solve_normal(self, S, Z):
        """Coefficients ``(alpha, beta)`` of the normal component of ``Z``."""
        return self._solve(S, Z.sum(axis=1), Z.T @ self.pi)

    def normal(self, S, alpha, beta):
        return (alpha[:, None] + self.pi[:, None] * beta[None, :]) * S

    def _enforce_tangent(self, S, xi):
        """Remove residual row and pi-row sums left by an inexact solve.

        The correction is the Fisher-normal component of the residual,
        computed with the exact desingularized solve, so entries where
        ``S`` is tiny are not disturbed.
        """
        r = xi.sum(axis=1)
        c = xi.T @ self.pi
        scale = np.linalg.norm(xi)
        if max(np.max(np.abs(r)), np.max(np.abs(c))) <= FEASIBILITY_TOL * scale:
            return xi
        ab = self._direct(self.system(S), r, c)
        ab.stats.method = "refine"
        self.solver_log.append(ab.stats)
        return xi - self.normal(S, ab.alpha, ab.beta)

    def project(self, S, Z):
        ab = self.solve_normal(S, Z)
        return self._enforce_tangent(S, Z - self.normal(S, ab.alpha, ab.beta))

    def _gradient_coefficients(self, S, G, gamma):
        cS, cG, ab = self._grad_ab
        if cS is not S or cG is not G:
            ab = self.solve_normal(S, gamma)
            self._grad_ab = (S, G, ab)
        return ab

    def egrad2rgrad(self, S, G):
        gamma = G * S
        ab = self._gradient_coefficients(S, G, gamma)
        return self._enforce_tangent(S, gamma - self.normal(S, ab.alpha, ab.beta))

    def ehess2rhess(self, S, G, H, xi):
        pi = self.pi
        gamma = G * S
        ab = self._gradient_coefficients(S, G, gamma)
        alpha, beta = ab.alpha, ab.beta
        grad = gamma - self.normal(S, alpha, beta)
        gamma_dot = H * S + G * xi
        # derivative of the system matrix along xi, applied to (alpha, beta)
        c = gamma_dot.sum(axis=1) - pi * (xi @ beta)
        d = gamma_dot.T @ pi - (xi.T @ (pi * alpha) + (xi.T @ (pi * pi)) * beta)
        ab_dot = self._solve(S, c, d)
        dgrad = (
            gamma_dot
            - self.normal(S, ab_dot.alpha, ab_dot.beta)
            - (alpha[:, None] + pi[:, None] * beta[None, :]) * xi
        )
        return self.project(S, dgrad - 0.5 * grad * xi / S)

    # -- retractions ----------------------------------------------------

    def retract(self, S, xi):
        if self.retraction == "linear":
            return self.retract_linear(S, xi)
        return self.retract_exp(S, xi)

    def retract_linear(self, S, xi):
        Y = S + xi
        if np.any(Y <= 0):
            raise StepTooLargeError("S + xi is not positive; shrink the step")
        return Y

    def retract_exp(self, S, xi):
        E = xi / S
        if np.max(np.abs(E)) > MAX_EXPONENT:
            raise RetractionOverflowError("exponent out of range in the retraction; shrink the step")
        Y = np.maximum(S * np.exp(E), POSITIVITY_FLOOR)
        out, _ = modified_sinkhorn(Y, self.pi, tol=SINKHORN_TOL, max_iter=self.sinkhorn_max_iter)
        return out

    def rand_point(self, random_state=None):
        rng = as_generator(random_state)
        B = 1.0 - rng.random((self.n, self.n))
        out, _ = modified_sinkhorn(B, self.pi, tol=SINKHORN_TOL)
        return out

    def constraint_residual(self, S):
        return float(max(np.max(np.abs(S.sum(axis=1) - 1.0)), np.max(np.abs(self.pi @ S - self.pi))))
