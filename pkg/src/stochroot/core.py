"""Dense matrix helpers shared by every other module.

Hadamard algebra, cached matrix powers, stationary distributions, the
p-th power residual and the plain-text matrix format.
"""

import numpy as np
import scipy.linalg as sla

from .exceptions import NotConvergedError, ReducibleChainError, ShapeError, ZeroDivisorError
from .validation import check_matrix, check_same_shape, check_square

#: Above this size the stationary distribution falls back to power iteration.
DIRECT_SOLVE_MAX_N = 2000


def hadamard_mul(A, B):
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    check_same_shape(A, B)
    return A * B


def hadamard_div(A, B):
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    check_same_shape(A, B)
    if np.any(B == 0):
        raise ZeroDivisorError("entrywise division by zero")
    return A / B


class PowerCache:
    """Powers ``X^0 .. X^p`` of a square matrix, built left to right.

    ``powers[k]`` is ``X^k``; index 0 holds the identity so that the
    gradient sums can index powers uniformly.
    """

    def __init__(self, X, p):
        X = check_square(X, "X")
        if int(p) != p or p < 1:
            raise ValueError("p must be an integer >= 1")
        p = int(p)
        self.base = X
        self.p = p
        powers = [np.eye(X.shape[0]), X]
        for _ in range(2, p + 1):
            powers.append(X @ powers[-1])
        self._powers = powers
        self._powers_T = None

    def __getitem__(self, k):
        return self._powers[k]

    def __len__(self):
        return self.p + 1

    @property
    def powers(self):
        """``[X^1, ..., X^p]``."""
        return self._powers[1:]

    @property
    def top(self):
        return self._powers[self.p]

    def transposed(self, k):
        if self._powers_T is None:
            self._powers_T = [P.T for P in self._powers]
        return self._powers_T[k]


def matrix_power_cache(X, p):
    return PowerCache(X, p)


def stationary_distribution(A, tol=1e-12, max_iter=100_000):
    """Stationary distribution ``pi`` with ``pi^T A = pi^T``, ``sum(pi) = 1``.

    Small and medium chains use a direct solve of ``(A^T - I) pi = 0`` with
    the last equation replaced by the normalization; larger ones use power
    iteration on ``A^T``.

    Raises
    ------
    ReducibleChainError
        If some entry of the computed vector is not positive.
    NotConvergedError
        If ``||pi^T A - pi^T||_inf > tol``.
    """
    A = check_square(A)
    n = A.shape[0]
    if n <= DIRECT_SOLVE_MAX_N:
        M = A.T - np.eye(n)
        M[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        try:
            pi = sla.solve(M, rhs)
        except sla.LinAlgError as exc:
            raise ReducibleChainError("singular stationary system; chain is reducible") from exc
        # one step of iterative refinement
        r = rhs - M @ pi
        pi = pi + sla.solve(M, r)
    else:
        pi = np.full(n, 1.0 / n)
        for _ in range(max_iter):
            nxt = A.T @ pi
            nxt /= nxt.sum()
            if np.max(np.abs(nxt - pi)) <= tol:
                pi = nxt
                break
            pi = nxt
    pi = pi / pi.sum()
    if np.any(pi <= 0):
        raise ReducibleChainError("stationary distribution has non-positive entries")
    res = np.max(np.abs(pi @ A - pi))
    if res > tol:
        raise NotConvergedError(f"stationary residual {res:.3e} exceeds tol {tol:.1e}", residual=res)
    return pi


def stationary_residual(A, pi):
    return float(np.max(np.abs(pi @ A - pi)))


def residual_fro(X, A, p):
    """``||X^p - A||_F``."""
    X, A = check_square(X, "X"), check_square(A)
    check_same_shape(X, A)
    return float(np.linalg.norm(np.linalg.matrix_power(X, int(p)) - A, "fro"))


def read_matrix(path):
    """Read the plain-text format: ``"n m"`` header then ``n`` rows of ``m`` values."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ShapeError(f"{path}: header must be 'n m'")
        n, m = int(header[0]), int(header[1])
        data = np.loadtxt(fh, dtype=float, ndmin=2)
    if data.size == 0:
        data = data.reshape(0, m)
    if data.shape != (n, m):
        raise ShapeError(f"{path}: expected {n}x{m} entries, got {data.shape}")
    return check_matrix(data)


def write_matrix(path, A):
    A = check_matrix(A)
    n, m = A.shape
    with open(path, "w") as fh:
        fh.write(f"{n} {m}\n")
        for row in A:
            fh.write(" ".join(f"{v:.17g}" for v in row))
            fh.write("\n")
