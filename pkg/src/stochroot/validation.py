"""Input validation helpers, in the spirit of ``sklearn.utils.check_array``."""

import numpy as np

from .exceptions import NonPositiveError, ShapeError, ValidationError

#: Row-sum tolerance for stochastic matrices.
TOL_ROW = 1e-12
#: Mass tolerance for probability vectors.
TOL_MASS = 1e-12


def check_matrix(A, name="A"):
    """Return ``A`` as a finite 2-D float array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return A


def check_square(A, name="A"):
    A = check_matrix(A, name)
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {A.shape}")
    return A


def check_same_shape(A, B):
    if np.shape(A) != np.shape(B):
        raise ShapeError(f"shape mismatch: {np.shape(A)} vs {np.shape(B)}")


def check_stochastic_matrix(A, *, positive=False, tol=TOL_ROW, name="A"):
    """Validate a row-stochastic matrix.

    Parameters
    ----------
    A : array_like, shape (n, n)
    positive : bool
        Require strictly positive entries instead of nonnegative ones.
    tol : float
        Allowed deviation of every row sum from one.

    Returns
    -------
    ndarray
        ``A`` as a float array (no copy when already float).
    """
    A = check_square(A, name)
    if positive:
        if np.any(A <= 0):
            raise NonPositiveError(f"{name} must be strictly positive")
    elif np.any(A < 0):
        raise ValidationError(f"{name} has negative entries")
    dev = np.max(np.abs(A.sum(axis=1) - 1.0))
    if dev > tol:
        raise ValidationError(f"{name} rows do not sum to one (max deviation {dev:.3e})")
    return A


def is_strictly_positive(A):
    return bool(np.all(np.asarray(A) > 0))


def check_probability_vector(pi, *, n=None, tol=TOL_MASS, name="pi"):
    """Validate a strictly positive vector summing to one."""
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1:
        raise ShapeError(f"{name} must be 1-D")
    if n is not None and pi.shape[0] != n:
        raise ShapeError(f"{name} has length {pi.shape[0]}, expected {n}")
    if not np.all(np.isfinite(pi)):
        raise ValidationError(f"{name} contains NaN or Inf")
    if np.any(pi <= 0):
        raise NonPositiveError(f"{name} must be strictly positive")
    if abs(pi.sum() - 1.0) > tol:
        raise ValidationError(f"{name} does not sum to one")
    return pi
