"""High-level driver: approximate stochastic p-th root of a stochastic matrix."""

from dataclasses import dataclass

import numpy as np

from .core import residual_fro, stationary_distribution
from .exceptions import StochRootError
from .linsolve import SolverOptions
from .manifolds import FixedStationaryManifold, MultinomialManifold
from .matrixgen import credit_risk_matrix
from .optimize import OPTIMIZERS, OptimOptions, OptimResult
from .problem import PthRootProblem
from .sinkhorn import modified_sinkhorn
from .validation import check_stochastic_matrix

MANIFOLDS = ("multinomial", "fixed_stationary")


@dataclass
class RootResult:
    """Outcome of :func:`compute_root`.

    ``stationary_err_inf`` is ``||pi_X - pi_A||_inf`` and is ``None`` when
    either chain has no well-defined positive stationary vector.
    """

    X: np.ndarray
    p: int
    manifold: str
    optimizer: str
    residual_fro: float
    stationary_err_inf: float
    pi: np.ndarray
    optim: OptimResult

    @property
    def iterations(self):
        return self.optim.iterations if self.optim is not None else 0


def build_manifold(name, n, pi=None, solver_options=None):
    if name == "multinomial":
        return MultinomialManifold(n)
    if name == "fixed_stationary":
        if pi is None:
            raise ValueError("the fixed_stationary manifold needs a stationary vector")
        return FixedStationaryManifold(pi, solver_options=solver_options)
    raise ValueError(f"manifold must be one of {MANIFOLDS}")


def _safe_stationary(A):
    try:
        return stationary_distribution(A)
    except StochRootError:
        return None


def compute_root(
    A,
    p,
    manifold="fixed_stationary",
    optimizer="tr",
    options=None,
    solver_options=None,
    X0=None,
    seed=None,
    pi=None,
    target=None,
    callback=None,
):
    """Approximate a stochastic ``p``-th root of ``A``.

    Parameters
    ----------
    A : array_like
        Row-stochastic matrix. On the fixed-stationary manifold it must be
        irreducible unless ``pi`` is supplied.
    p : int
        Root order. ``p = 1`` returns ``A`` itself.
    manifold : {"multinomial", "fixed_stationary"}
    optimizer : {"tr", "lbfgs"}
    options : OptimOptions, optional
    solver_options : SolverOptions, optional
        Projection solver on the fixed-stationary manifold.
    X0 : ndarray, optional
        Starting point; a seeded random manifold point by default.
    seed : int, optional
        Seed of the random starting point.
    pi : ndarray, optional
        Stationary vector defining the manifold, overriding ``pi(A)``.
    target : ndarray, optional
        Matrix whose root is sought, if different from ``A`` (``A`` then
        only determines ``pi``).
    callback : callable, optional
        Forwarded to the optimizer.

    Returns
    -------
    RootResult
    """
    A = check_stochastic_matrix(A)
    T = A if target is None else check_stochastic_matrix(target, name="target")
    if int(p) != p or p < 1:
        raise ValueError("p must be a positive integer")
    p = int(p)
    if optimizer not in OPTIMIZERS:
        raise ValueError(f"optimizer must be one of {tuple(OPTIMIZERS)}")
    if manifold == "fixed_stationary" and pi is None:
        pi = stationary_distribution(A)
    pi_ref = pi if pi is not None else _safe_stationary(T)

    if p == 1:
        X = T.copy()
        return RootResult(X, 1, manifold, optimizer, 0.0, _stationary_error(X, pi_ref), pi, None)

    M = build_manifold(manifold, A.shape[0], pi, solver_options or SolverOptions())
    if X0 is None:
        X0 = M.rand_point(seed)
    problem = PthRootProblem(T, p, M)
    res = OPTIMIZERS[optimizer](problem, X0, options or OptimOptions(), callback=callback)
    X = res.X
    return RootResult(X, p, manifold, optimizer, residual_fro(X, T, p), _stationary_error(X, pi_ref), pi, res)


def _stationary_error(X, pi_ref):
    if pi_ref is None:
        return None
    pi_X = _safe_stationary(X)
    if pi_X is None:
        return None
    return float(np.max(np.abs(pi_X - pi_ref)))


def perturb_irreducible(A, gamma):
    """``(1 - gamma) A + gamma 1 1^T / n``."""
    A = check_stochastic_matrix(A)
    n = A.shape[0]
    return (1.0 - gamma) * A + gamma * np.ones((n, n)) / n


def credit_risk_start(pi, gamma):
    """Perturbed row-normalized upper-triangular matrix scaled onto the manifold of ``pi``."""
    n = pi.shape[0]
    U = np.triu(np.ones((n, n)))
    U /= U.sum(axis=1)[:, None]
    X0 = gamma * np.ones((n, n)) + (1.0 - gamma) * U
    return modified_sinkhorn(X0, pi)[0]


def credit_risk_root(A=None, gamma=1e-4, p=2, optimizer="tr", options=None, solver_options=None, callback=None):
    """Root of a reducible rating matrix on the manifold of a perturbed chain.

    The stationary vector ``pi_tilde`` of ``perturb_irreducible(A, gamma)``
    defines the manifold, while the objective targets the unperturbed
    ``A``. Returns ``(pi_tilde, RootResult)``.
    """
    A = credit_risk_matrix() if A is None else check_stochastic_matrix(A)
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    pi_t = stationary_distribution(perturb_irreducible(A, gamma))
    X0 = credit_risk_start(pi_t, gamma)
    res = compute_root(
        A,
        p,
        manifold="fixed_stationary",
        optimizer=optimizer,
        options=options,
        solver_options=solver_options,
        X0=X0,
        pi=pi_t,
        callback=callback,
    )
    return pi_t, res
