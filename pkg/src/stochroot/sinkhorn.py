"""Sinkhorn-Knopp balancing to prescribed marginals.

``sinkhorn_balance`` is the classical alternating row/column scaling of a
positive matrix. ``modified_sinkhorn`` pushes a positive matrix onto the
set of stochastic matrices with a prescribed stationary distribution by
balancing ``diag(pi) A`` to row and column marginals ``pi``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import NonPositiveInputError, NotConvergedError, ShapeError
from .validation import check_probability_vector, check_square

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class ScalingPair:
    """Diagonals of ``D_1`` and ``D_2``, normalized so that ``d1[0] == 1``."""

    d1: np.ndarray
    d2: np.ndarray

    def apply(self, A):
        return self.d1[:, None] * A * self.d2[None, :]


def _gauge_fixed(d1, d2):
    t = d1[0]
    return ScalingPair(d1 / t, d2 * t)


def sinkhorn_balance(A, r, c, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, row_weights=None):
    """Find ``B = D_1 A D_2`` with ``B 1 = r`` and ``B^T 1 = c``.

    Parameters
    ----------
    A : ndarray, shape (n, m)
        Strictly positive matrix.
    r, c : ndarray
        Nonnegative target marginals with equal mass.
    tol : float
        Sup-norm tolerance on both marginal residuals, checked after each
        full sweep (rows first, then columns).
    max_iter : int
        Maximum number of sweeps.
    row_weights : ndarray, optional
        The row residual is measured as ``|B 1 - r| / row_weights``.

    Returns
    -------
    B : ndarray
    scaling : ScalingPair
    """
    A = np.asarray(A, dtype=float)
    r = np.asarray(r, dtype=float)
    c = np.asarray(c, dtype=float)
    if A.ndim != 2 or r.shape != (A.shape[0],) or c.shape != (A.shape[1],):
        raise ShapeError("marginals do not match matrix shape")
    if np.any(A <= 0) or not np.all(np.isfinite(A)):
        raise NonPositiveInputError("Sinkhorn balancing needs a strictly positive matrix")
    if np.any(r < 0) or np.any(c < 0):
        raise ValueError("marginals must be nonnegative")
    if abs(r.sum() - c.sum()) > 1e-12 * max(1.0, r.sum()):
        raise ValueError("row and column marginals must have equal mass")
    w = np.ones_like(r) if row_weights is None else np.asarray(row_weights, dtype=float)

    d2 = np.ones(A.shape[1])
    AT = A.T.copy()
    row_res = col_res = np.inf
    for it in range(1, max_iter + 1):
        d1 = r / (A @ d2)
        colsum = AT @ d1
        d2 = c / colsum
        row_res = (np.abs(d1 * (A @ d2) - r) / w).max()
        col_res = np.abs(d2 * colsum - c).max()
        if row_res <= tol and col_res <= tol:
            scaling = _gauge_fixed(d1, d2)
            return scaling.apply(A), scaling
    raise NotConvergedError(
        f"Sinkhorn did not converge in {max_iter} sweeps (row {row_res:.2e}, col {col_res:.2e})",
        iterations=max_iter,
        residual=max(row_res, col_res),
    )


def modified_sinkhorn(A, pi, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Scale a positive ``A`` into ``{S > 0 : S 1 = 1, pi^T S = pi^T}``.

    Balances ``diag(pi) A`` to marginals ``(pi, pi)``; the same diagonal
    factors applied to ``A`` give the returned ``S``. The tolerance applies
    to ``||S 1 - 1||_inf`` and ``||pi^T S - pi^T||_inf``.
    """
    A = check_square(A)
    pi = check_probability_vector(pi, n=A.shape[0])
    _, scaling = sinkhorn_balance(pi[:, None] * A, pi, pi, tol=tol, max_iter=max_iter, row_weights=pi)
    return scaling.apply(A), scaling
