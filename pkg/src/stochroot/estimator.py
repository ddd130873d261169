"""scikit-learn style wrapper around :func:`stochroot.roots.compute_root`."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .linsolve import SolverOptions
from .optimize import OptimOptions
from .roots import compute_root
from .validation import check_matrix, check_stochastic_matrix


class StochasticRoot(TransformerMixin, BaseEstimator):
    """Approximate stochastic ``p``-th root of a transition matrix.

    Parameters
    ----------
    p : int, default=2
        Root order.
    manifold : {"fixed_stationary", "multinomial"}, default="fixed_stationary"
        ``"fixed_stationary"`` keeps the stationary distribution of the
        fitted matrix exactly.
    optimizer : {"tr", "lbfgs"}, default="tr"
    tolgradnorm : float, default=1e-7
    max_iter : int, default=500
        Outer iterations of the optimizer.
    formulation, method, correction
        Projection solver settings, see :class:`~stochroot.linsolve.SolverOptions`.
    random_state : int or None
        Seed of the random starting point.

    Attributes
    ----------
    root_ : ndarray of shape (n, n)
    stationary_ : ndarray of shape (n,) or None
        Stationary vector defining the manifold (fixed-stationary only).
    residual_ : float
        ``||root_^p - A||_F``.
    stationary_error_ : float or None
    n_iter_ : int
    result_ : RootResult
    """

    def __init__(
        self,
        p=2,
        manifold="fixed_stationary",
        optimizer="tr",
        tolgradnorm=1e-7,
        max_iter=500,
        formulation="schur",
        method="cg",
        correction=False,
        random_state=None,
    ):
        self.p = p
        self.manifold = manifold
        self.optimizer = optimizer
        self.tolgradnorm = tolgradnorm
        self.max_iter = max_iter
        self.formulation = formulation
        self.method = method
        self.correction = correction
        self.random_state = random_state

    def fit(self, A, y=None):
        """Compute the root of the stochastic matrix ``A``."""
        A = check_stochastic_matrix(A)
        res = compute_root(
            A,
            self.p,
            manifold=self.manifold,
            optimizer=self.optimizer,
            options=OptimOptions(tolgradnorm=self.tolgradnorm, max_outer=self.max_iter),
            solver_options=SolverOptions(formulation=self.formulation, method=self.method, correction=self.correction),
            seed=self.random_state,
        )
        self.result_ = res
        self.root_ = res.X
        self.stationary_ = res.pi
        self.residual_ = res.residual_fro
        self.stationary_error_ = res.stationary_err_inf
        self.n_iter_ = res.iterations
        self.n_features_in_ = A.shape[0]
        return self

    def transform(self, P):
        """Advance distributions (rows of ``P``) by one root step: ``P @ root_``."""
        check_is_fitted(self, "root_")
        P = np.atleast_2d(check_matrix(np.atleast_2d(P), "P"))
        if P.shape[1] != self.n_features_in_:
            raise ValueError(f"P has {P.shape[1]} columns, expected {self.n_features_in_}")
        return P @ self.root_

    def score(self, A, y=None):
        """Negative residual ``-||root_^p - A||_F``; larger is better."""
        check_is_fitted(self, "root_")
        A = check_stochastic_matrix(A)
        return -float(np.linalg.norm(np.linalg.matrix_power(self.root_, int(self.p)) - A))
