"""Positive row-stochastic matrices with the Fisher metric."""

import numpy as np

from ..exceptions import RetractionOverflowError
from .base import Manifold, as_generator

#: Largest admissible exponent modulus in the exponential retraction; below
#: ``-MAX_EXPONENT`` entries would underflow to the positivity floor.
MAX_EXPONENT = 700.0
#: Entries of retracted points are floored here before any division.
POSITIVITY_FLOOR = 1e-300


class MultinomialManifold(Manifold):
    """``{S > 0 : S 1 = 1}``; tangent space ``{xi : xi 1 = 0}``."""

    name = "multinomial"

    @property
    def dim(self):
        return self.n * (self.n - 1)

    def project(self, S, Z):
        return Z - Z.sum(axis=1)[:, None] * S

    def ehess2rhess(self, S, G, H, xi):
        gamma = G * S
        gamma_dot = H * S + G * xi
        alpha = gamma.sum(axis=1)[:, None]
        alpha_dot = gamma_dot.sum(axis=1)[:, None]
        grad = gamma - alpha * S
        return self.project(S, gamma_dot - alpha_dot * S - alpha * xi - 0.5 * grad * xi / S)

    def retract(self, S, xi):
        """``S * exp(xi / S)`` with rows renormalized."""
        E = xi / S
        if np.max(np.abs(E)) > MAX_EXPONENT:
            raise RetractionOverflowError("exponent out of range in the retraction; shrink the step")
        Y = np.maximum(S * np.exp(E), POSITIVITY_FLOOR)
        return Y / Y.sum(axis=1)[:, None]

    def rand_point(self, random_state=None):
        rng = as_generator(random_state)
        B = 1.0 - rng.random((self.n, self.n))  # in (0, 1]
        return B / B.sum(axis=1)[:, None]

    def constraint_residual(self, S):
        return float(np.max(np.abs(S.sum(axis=1) - 1.0)))
