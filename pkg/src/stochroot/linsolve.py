"""Solvers for the singular symmetric projection system.

At a point ``S`` of the fixed-stationary manifold the tangent projection
needs ``(x, y)`` with

    [ I           D_pi S            ] [x]   [c]
    [ S^T D_pi    diag(S^T D_pi pi) ] [y] = [d]

The matrix is positive semidefinite with the one-dimensional null space
spanned by ``[-pi; 1]``. Right-hand sides built from ``Z 1`` and
``Z^T pi`` are orthogonal to it, so every method here works on the
consistent singular system (iterative methods after deflating the
right-hand side; direct methods after a rank-one desingularization).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, lsqr

from .exceptions import (
    BreakdownNullStartError,
    NotConvergedError,
    PivotFailure,
    SingularFactorizationError,
)

FORMULATIONS = ("block", "schur")
METHODS = ("direct", "cg", "lsqr", "pcg_ichol", "pcg_neumann")


@dataclass
class SolverOptions:
    """How to solve the projection system.

    ``max_iter=None`` means ``20 n``. ``neumann_k``/``neumann_tau`` are the
    degree and drop threshold of the truncated Neumann preconditioner, and
    ``ichol_droptol`` the relative drop threshold of the incomplete
    Cholesky factorization.
    """

    formulation: str = "schur"
    method: str = "cg"
    correction: bool = False
    tol: float = 1e-10
    max_iter: int = None
    neumann_k: int = 2
    neumann_tau: float = 1e-4
    ichol_droptol: float = 1e-3

    def __post_init__(self):
        self.formulation = str(self.formulation).lower()
        self.method = str(self.method).lower()
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.neumann_k < 0 or self.neumann_tau < 0:
            raise ValueError("neumann_k and neumann_tau must be nonnegative")


@dataclass
class SolveStats:
    method: str
    formulation: str
    iterations: int
    residual: float
    fallback: bool = False


@dataclass
class AlphaBeta:
    alpha: np.ndarray
    beta: np.ndarray
    stats: SolveStats = field(default=None, repr=False)

    @property
    def stacked(self):
        return np.concatenate([self.alpha, self.beta])


class ProjectionSystem:
    """Matrix-free block operator at a point ``S`` for stationary vector ``pi``.

    Dense forms and preconditioners are built lazily and kept for the
    lifetime of the object, i.e. for one manifold point.
    """

    def __init__(self, S, pi):
        self.S = np.asarray(S, dtype=float)
        self.pi = np.asarray(pi, dtype=float)
        self.n = self.S.shape[0]
        self.PS = self.pi[:, None] * self.S
        self.delta = self.S.T @ (self.pi * self.pi)
        self.null_vector = np.concatenate([-self.pi, np.ones(self.n)])
        self._cache = {}

    def matvec(self, v):
        n = self.n
        x, y = v[:n], v[n:]
        return np.concatenate([x + self.PS @ y, self.PS.T @ x + self.delta * y])

    def dense(self):
        if "dense" not in self._cache:
            n = self.n
            M = np.empty((2 * n, 2 * n))
            M[:n, :n] = np.eye(n)
            M[:n, n:] = self.PS
            M[n:, :n] = self.PS.T
            M[n:, n:] = np.diag(self.delta)
            self._cache["dense"] = M
        return self._cache["dense"]

    def schur_matvec(self, y):
        return self.delta * y - self.PS.T @ (self.PS @ y)

    def schur_dense(self):
        if "schur" not in self._cache:
            self._cache["schur"] = np.diag(self.delta) - self.PS.T @ self.PS
        return self._cache["schur"]

    def schur_rhs(self, c, d):
        return d - self.PS.T @ c

    def recover_x(self, c, y):
        return c - self.PS @ y

    def block_rank1_weight(self):
        return 1.0 / (self.pi @ self.pi + self.n)

    def m_matrix_form(self):
        """``D^{-1} A D`` with ``D = diag(D_pi, -I)``; a singular Z-matrix."""
        n = self.n
        d = np.concatenate([self.pi, -np.ones(n)])
        return self.dense() / d[:, None] * d[None, :]


@dataclass(frozen=True)
class SpectralBounds:
    lower: float
    upper: float
    r_star: float
    delta_star: float
    column: int
    lower_simplified: float
    r_star_statement: float


def spectral_bounds(sys):
    """Enclosure of the nonzero eigenvalues of the projection system.

    The upper end is ``max(1 + ||pi||_inf, 2 ||pi||_inf)``. The lower end
    comes from interlacing after deleting column ``k`` of ``S`` plus a
    Gershgorin estimate optimized over a diagonal similarity, with
    ``r* = min_j max_i (1 - s_ij)``, ``k`` its minimizer and
    ``delta* = min_{i != k} (S^T D_pi pi)_i``. ``lower_simplified`` is the
    cruder ``delta* (1 - r*/(1 - delta*))`` (NaN unless ``r* + delta* < 1``);
    ``r_star_statement`` is ``min_j max_i s_ij`` for comparison.
    """
    S, pi, delta = sys.S, sys.pi, sys.delta
    pinf = float(np.max(pi))
    upper = max(1.0 + pinf, 2.0 * pinf)
    col_max = np.max(1.0 - S, axis=0)
    k = int(np.argmin(col_max))
    r_star = float(col_max[k])
    delta_star = float(np.min(np.delete(delta, k)))
    disc = delta_star * (delta_star + 4.0 * r_star - 2.0) + 1.0
    lower = 0.5 * (delta_star + 1.0 - np.sqrt(disc))
    if r_star + delta_star < 1.0:
        simplified = delta_star * (1.0 - r_star / (1.0 - delta_star))
    else:
        simplified = float("nan")
    return SpectralBounds(
        lower=float(lower),
        upper=float(upper),
        r_star=r_star,
        delta_star=delta_star,
        column=k,
        lower_simplified=float(simplified),
        r_star_statement=float(np.min(np.max(S, axis=0))),
    )


def schur_shift(sys):
    """Mean of the Gershgorin upper and interlacing lower spectral bounds of
    the Schur matrix; used as the rank-one correction weight."""
    upper = 2.0 * np.max(np.abs(sys.delta))
    off = sys.PS.T @ sys.PS
    # deleting index j leaves a matrix whose Gershgorin discs start at |M_ij|
    lower = 0.0
    for j in range(sys.n):
        lower = max(lower, float(np.min(np.delete(off[:, j], j))))
    return 0.5 * (upper + lower)


# ---------------------------------------------------------------- iterations


def _cg(matvec, b, atol, maxiter, precond=None):
    """(P)CG from a zero initial guess; returns ``(x, iterations)``."""
    x = np.zeros_like(b)
    r = b.copy()
    if np.linalg.norm(r) <= atol:
        return x, 0
    z = r if precond is None else precond(r)
    p = z.copy()
    rz = r @ z
    for k in range(1, maxiter + 1):
        Ap = matvec(p)
        pAp = p @ Ap
        if pAp <= 0 or rz <= 0:
            break
        a = rz / pAp
        x += a * p
        r -= a * Ap
        if np.linalg.norm(r) <= atol:
            return x, k
        z = r if precond is None else precond(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = np.linalg.norm(b - matvec(x))
    if res <= atol:
        return x, k
    raise NotConvergedError(f"CG stopped after {k} iterations, residual {res:.2e}", iterations=k, residual=res)


def _lsqr(matvec, b, atol, maxiter):
    m = b.shape[0]
    op = LinearOperator((m, m), matvec=matvec, rmatvec=matvec, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm <= atol:
        return np.zeros_like(b), 0
    out = lsqr(op, b, atol=0.0, btol=atol / bnorm, iter_lim=maxiter, conlim=1e16)
    x, itn = out[0], out[2]
    res = np.linalg.norm(b - matvec(x))
    if res > atol:
        raise NotConvergedError(f"LSQR stopped after {itn} iterations, residual {res:.2e}", iterations=itn, residual=res)
    return x, itn


def _deflate(v, null):
    nn = null @ null
    return v - (v @ null / nn) * null


# ----------------------------------------------------------- preconditioners


def _scaled_schur(sys):
    if "scaled_schur" not in sys._cache:
        dm = 1.0 / np.sqrt(sys.delta)
        sys._cache["scaled_schur"] = dm[:, None] * (sys.PS.T @ sys.PS) * dm[None, :]
    return sys._cache["scaled_schur"]


def neumann_preconditioner(sys, k, tau):
    """Truncated Neumann series ``P = I + sum_{j=1..k} S_hat^j``.

    ``S_hat`` is ``diag(delta)^{-1/2} S^T D_pi^2 S diag(delta)^{-1/2}`` with
    entries of modulus below ``tau`` dropped. The returned callable applies
    ``P`` and is meant for the symmetrically scaled Schur system.
    """
    S_hat = _scaled_schur(sys).copy()
    S_hat[np.abs(S_hat) < tau] = 0.0

    def apply(v):
        z = v
        for _ in range(k):
            z = v + S_hat @ z
        return z

    apply.matrix = S_hat
    return apply


def ichol_factor(K, droptol=1e-3, compensation=0.0):
    """Diagonally compensated modified incomplete Cholesky of a dense ``K``.

    Off-diagonal entries of the working column below
    ``droptol * sqrt(K_ii K_kk)`` are dropped and added to both diagonals
    (row sums are preserved); ``compensation`` is added to the diagonal
    up front. Returns the lower factor ``L``.
    """
    W = np.array(K, dtype=float)
    n = W.shape[0]
    W[np.diag_indices(n)] += compensation
    L = np.zeros_like(W)
    floor = 64 * np.finfo(float).eps * np.max(np.abs(np.diag(W)))
    for k in range(n):
        if droptol > 0 and k + 1 < n:
            col = W[k + 1 :, k]
            scale = np.sqrt(np.abs(np.diag(W)[k + 1 :] * W[k, k]))
            drop = np.abs(col) < droptol * scale
            if np.any(drop):
                idx = np.nonzero(drop)[0] + k + 1
                dropped = W[idx, k].copy()
                W[idx, idx] += dropped
                W[k, k] += dropped.sum()
                W[idx, k] = 0.0
                W[k, idx] = 0.0
        pivot = W[k, k]
        if not pivot > floor:
            raise PivotFailure(f"non-positive pivot {pivot:.3e} at step {k}")
        L[k, k] = np.sqrt(pivot)
        l = W[k + 1 :, k] / L[k, k]
        L[k + 1 :, k] = l
        W[k + 1 :, k + 1 :] -= np.outer(l, l)
    return L


def ichol_preconditioner(sys, droptol=1e-3, compensation=None, correction=False):
    """Incomplete Cholesky preconditioner for the (optionally shifted) Schur matrix.

    The default compensation is ``min(pi)`` relative to the largest
    diagonal entry. Returns a callable applying ``(L L^T)^{-1}``.
    """
    K = sys.schur_dense()
    if correction:
        K = K + schur_shift(sys) / sys.n
    if compensation is None:
        compensation = float(np.min(sys.pi)) * float(np.max(np.diag(K)))
    L = ichol_factor(K, droptol=droptol, compensation=compensation)

    def apply(v):
        w = sla.solve_triangular(L, v, lower=True, check_finite=False)
        return sla.solve_triangular(L, w, lower=True, trans="T", check_finite=False)

    apply.factor = L
    return apply


# ------------------------------------------------------------------ drivers


def _max_iter(sys, opts):
    return opts.max_iter if opts.max_iter is not None else 20 * sys.n


def _block_residual(sys, alpha, beta, c, d):
    r = sys.matvec(np.concatenate([alpha, beta])) - np.concatenate([c, d])
    scale = np.linalg.norm(np.concatenate([c, d]))
    return float(np.linalg.norm(r) / scale) if scale > 0 else float(np.linalg.norm(r))


def solve_block_desingularized(sys, c, d):
    """Dense LU solve of ``A + w [pi; -1][pi; -1]^T``, ``w = 1/(pi^T pi + n)``.

    For a consistent right-hand side the result also solves the original
    singular system.
    """
    if "block_lu" not in sys._cache:
        u = np.concatenate([sys.pi, -np.ones(sys.n)])
        M = sys.dense() + sys.block_rank1_weight() * np.outer(u, u)
        try:
            lu = sla.lu_factor(M, check_finite=True)
        except (sla.LinAlgError, ValueError) as exc:
            raise SingularFactorizationError(str(exc)) from exc
        if np.any(np.abs(np.diag(lu[0])) <= np.finfo(float).eps * np.max(np.abs(M))):
            raise SingularFactorizationError("rank-one corrected block matrix is singular")
        sys._cache["block_lu"] = lu
    v = sla.lu_solve(sys._cache["block_lu"], np.concatenate([c, d]))
    n = sys.n
    alpha, beta = v[:n], v[n:]
    stats = SolveStats("direct", "block", 1, _block_residual(sys, alpha, beta, c, d))
    return AlphaBeta(alpha, beta, stats)


def solve_block_lstsq(sys, c, d):
    """Minimum-norm least-squares solution of the block system.

    Last resort for points so close to the boundary that the
    desingularized matrix is numerically singular.
    """
    n = sys.n
    v = sla.lstsq(sys.dense(), np.concatenate([c, d]), cond=None, lapack_driver="gelsd")[0]
    alpha, beta = v[:n], v[n:]
    stats = SolveStats("lstsq", "block", 1, _block_residual(sys, alpha, beta, c, d), fallback=True)
    return AlphaBeta(alpha, beta, stats)


def _schur_direct(sys, rhs):
    if "schur_chol" not in sys._cache:
        K = sys.schur_dense() + schur_shift(sys) / sys.n
        try:
            sys._cache["schur_chol"] = sla.cho_factor(K)
        except sla.LinAlgError as exc:
            raise SingularFactorizationError(str(exc)) from exc
    return sla.cho_solve(sys._cache["schur_chol"], rhs)


def _block_precond_from_schur(sys, schur_inv):
    """Exact block LDL^T factors with an approximate Schur inverse."""
    n = sys.n
    B = sys.PS

    def apply(v):
        v1, v2 = v[:n], v[n:]
        u2 = schur_inv(v2 - B.T @ v1)
        return np.concatenate([v1 - B @ u2, u2])

    return apply


def _neumann_schur_inverse(sys, opts):
    P = neumann_preconditioner(sys, opts.neumann_k, opts.neumann_tau)
    dm = 1.0 / np.sqrt(sys.delta)
    return lambda r: dm * P(dm * r)


def _ichol_schur_inverse(sys, opts):
    return ichol_preconditioner(sys, droptol=opts.ichol_droptol, correction=opts.correction)


def solve_block(sys, c, d, opts=None):
    """Solve the 2n x 2n block system with the method in ``opts``."""
    opts = opts or SolverOptions(formulation="block")
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    n = sys.n
    rhs = np.concatenate([c, d])
    scale = np.linalg.norm(rhs)
    if scale == 0:
        z = np.zeros(n)
        return AlphaBeta(z, z.copy(), SolveStats(opts.method, "block", 0, 0.0))
    if opts.method == "direct":
        return solve_block_desingularized(sys, c, d)
    b = _deflate(rhs, sys.null_vector)
    if np.linalg.norm(b) <= 1e-14 * scale:
        raise BreakdownNullStartError("right-hand side lies in the null space")
    atol = opts.tol * scale
    maxiter = _max_iter(sys, opts)
    if opts.correction:
        u = np.concatenate([sys.pi, -np.ones(n)])
        w = sys.block_rank1_weight()

        def op(v):
            return sys.matvec(v) + w * (u @ v) * u

    else:
        op = sys.matvec
    fallback = False
    if opts.method == "cg":
        v, it = _cg(op, b, atol, maxiter)
    elif opts.method == "lsqr":
        v, it = _lsqr(op, b, atol, maxiter)
    else:
        try:
            schur_inv = _neumann_schur_inverse(sys, opts) if opts.method == "pcg_neumann" else _ichol_schur_inverse(sys, opts)
            precond = _block_precond_from_schur(sys, schur_inv)
        except PivotFailure:
            precond, fallback = None, True
        v, it = _cg(op, b, atol, maxiter, precond)
    alpha, beta = v[:n], v[n:]
    stats = SolveStats(opts.method, "block", it, _block_residual(sys, alpha, beta, c, d), fallback)
    return AlphaBeta(alpha, beta, stats)


def solve_schur(sys, c, d, opts=None):
    """Solve through the Schur complement of the identity block.

    ``y`` solves ``[diag(delta) - S^T D_pi^2 S] y = d - S^T D_pi c`` and
    ``x = c - D_pi S y``. Returns ``AlphaBeta(alpha=x, beta=y)``.
    """
    opts = opts or SolverOptions()
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    n = sys.n
    scale = np.linalg.norm(np.concatenate([c, d]))
    rhs = sys.schur_rhs(c, d)
    if scale == 0 or np.linalg.norm(rhs) == 0:
        y = np.zeros(n)
        x = sys.recover_x(c, y)
        return AlphaBeta(x, y, SolveStats(opts.method, "schur", 0, _block_residual(sys, x, y, c, d)))
    ones = np.ones(n)
    rhs = _deflate(rhs, ones)
    if np.linalg.norm(rhs) <= 1e-14 * scale:
        raise BreakdownNullStartError("reduced right-hand side lies in the null space")
    atol = opts.tol * scale
    maxiter = _max_iter(sys, opts)
    fallback = False
    if opts.method == "direct":
        y, it = _schur_direct(sys, rhs), 1
    else:
        if opts.correction:
            sigma = schur_shift(sys)

            def op(v):
                return sys.schur_matvec(v) + (sigma / n) * v.sum() * ones

        else:
            op = sys.schur_matvec
        if opts.method == "cg":
            y, it = _cg(op, rhs, atol, maxiter)
        elif opts.method == "lsqr":
            y, it = _lsqr(op, rhs, atol, maxiter)
        elif opts.method == "pcg_ichol":
            try:
                precond = _ichol_schur_inverse(sys, opts)
            except PivotFailure:
                precond, fallback = None, True
            y, it = _cg(op, rhs, atol, maxiter, precond)
        else:
            dm = 1.0 / np.sqrt(sys.delta)
            P = neumann_preconditioner(sys, opts.neumann_k, opts.neumann_tau)

            def scaled_op(v):
                return dm * op(dm * v)

            # the true residual is diag(delta)^{1/2} times the scaled one
            yt, it = _cg(scaled_op, dm * rhs, atol / np.max(np.sqrt(sys.delta)), maxiter, P)
            y = dm * yt
    x = sys.recover_x(c, y)
    stats = SolveStats(opts.method, "schur", it, _block_residual(sys, x, y, c, d), fallback)
    return AlphaBeta(x, y, stats)


def solve(sys, c, d, opts=None):
    """Dispatch on ``opts.formulation``."""
    opts = opts or SolverOptions()
    if opts.formulation == "block":
        return solve_block(sys, c, d, opts)
    return solve_schur(sys, c, d, opts)
