"""The p-th root objective ``f(X) = ||X^p - A||_F^2 / 2``."""

import numpy as np

from .core import PowerCache
from .exceptions import ShapeError
from .validation import check_square


class PthRootProblem:
    """Cost, Euclidean gradient and Hessian-vector product of the root objective.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Target matrix.
    p : int
        Root order, at least 2.
    manifold : Manifold
        Search space; its size must match ``A``.

    Notes
    -----
    Powers of the current iterate are computed once and reused across
    ``cost``, ``egrad`` and ``ehess`` as long as the same array object is
    passed in.
    """

    def __init__(self, A, p, manifold):
        A = check_square(A, "A")
        if int(p) != p or p < 2:
            raise ValueError("p must be an integer >= 2")
        if manifold.n != A.shape[0]:
            raise ShapeError(f"manifold size {manifold.n} does not match A of size {A.shape[0]}")
        self.A = A
        self.p = int(p)
        self.manifold = manifold
        self._key = None
        self._cache = None
        self._residual = None
        self._grad = None

    def _powers(self, X):
        if self._key is not X:
            if X.shape != self.A.shape:
                raise ShapeError("X and A must have the same shape")
            cache = PowerCache(X, self.p)
            self._key, self._cache = X, cache
            self._residual = cache.top - self.A
            self._grad = None
        return self._cache, self._residual

    def cost(self, X):
        _, R = self._powers(X)
        return 0.5 * float(np.sum(R * R))

    def egrad(self, X):
        """``sum_k (X^T)^k R (X^T)^(p-1-k)`` with ``R = X^p - A``."""
        P, R = self._powers(X)
        if self._grad is None:
            p = self.p
            G = np.zeros_like(R)
            for k in range(p):
                G += P.transposed(k) @ R @ P.transposed(p - 1 - k)
            self._grad = G
        return self._grad

    def _power_derivatives(self, P, xi):
        # D[m] = D(X^m)[xi], via D[m] = D[m-1] X + X^(m-1) xi
        D = [np.zeros_like(xi)]
        X = P[1]
        for m in range(1, self.p + 1):
            D.append(D[-1] @ X + P[m - 1] @ xi)
        return D

    def ehess(self, X, xi):
        """Directional derivative of :meth:`egrad` along ``xi``."""
        P, R = self._powers(X)
        p = self.p
        D = self._power_derivatives(P, xi)
        R_dot = D[p]
        H = np.zeros_like(R)
        for k in range(p):
            j = p - 1 - k
            XTk, XTj = P.transposed(k), P.transposed(j)
            H += D[k].T @ R @ XTj + XTk @ R_dot @ XTj + XTk @ R @ D[j].T
        return H

    # Riemannian quantities, delegated to the manifold

    def rgrad(self, X):
        return self.manifold.egrad2rgrad(X, self.egrad(X))

    def rhess(self, X, xi):
        return self.manifold.ehess2rhess(X, self.egrad(X), self.ehess(X, xi), xi)
