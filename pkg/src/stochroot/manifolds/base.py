"""Common interface of the matrix manifolds used by the optimizers.

Points and tangent vectors are plain ``(n, n)`` float arrays; a tangent
vector is always interpreted at the point it is passed with.
"""

from abc import ABC, abstractmethod

import numpy as np

from ..exceptions import StepTooLargeError


def as_generator(random_state=None):
    """A ``numpy.random.Generator`` (PCG64) from a seed, generator or ``None``."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.Generator(np.random.PCG64(random_state))


class Manifold(ABC):
    """Positive matrices with row-type linear constraints and the Fisher metric."""

    name = "manifold"

    def __init__(self, n):
        self.n = int(n)

    @property
    @abstractmethod
    def dim(self):
        """Manifold dimension."""

    def inner(self, S, xi, eta):
        """Fisher metric ``sum_ij xi_ij eta_ij / S_ij``."""
        return float(np.sum(xi * eta / S))

    def norm(self, S, xi):
        return float(np.sqrt(max(self.inner(S, xi, xi), 0.0)))

    def zero_vector(self, S):
        return np.zeros_like(S)

    @abstractmethod
    def project(self, S, Z):
        """Fisher-orthogonal projection of an ambient ``Z`` onto ``T_S``."""

    def egrad2rgrad(self, S, G):
        return self.project(S, G * S)

    @abstractmethod
    def ehess2rhess(self, S, G, H, xi):
        """Riemannian Hessian along ``xi`` from the Euclidean gradient ``G``
        and Euclidean Hessian-vector product ``H``."""

    @abstractmethod
    def retract(self, S, xi):
        """Default retraction."""

    def retract_second_order(self, S, xi):
        """``S + xi + P_S(xi*xi/S)/4``.

        The feasible set is affine, so the quadratic curve stays on the
        manifold; its covariant acceleration at ``t = 0`` vanishes, which
        makes the map a second-order retraction. Defined only while the
        result stays positive.
        """
        Y = S + xi + 0.25 * self.project(S, xi * xi / S)
        if np.any(Y <= 0):
            raise StepTooLargeError("second-order step leaves the positive orthant")
        return Y

    def transport(self, S_old, S_new, xi):
        """Vector transport by projection onto the new tangent space."""
        return self.project(S_new, xi)

    @abstractmethod
    def rand_point(self, random_state=None):
        """Random point on the manifold."""

    def rand_tangent(self, S, random_state=None):
        """Random tangent vector of unit Fisher norm."""
        rng = as_generator(random_state)
        xi = self.project(S, rng.standard_normal(S.shape))
        return xi / self.norm(S, xi)

    @abstractmethod
    def constraint_residual(self, S):
        """Largest violation of the defining linear constraints."""
