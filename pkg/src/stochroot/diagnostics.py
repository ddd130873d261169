"""Diagnostics around the projection system: spectral bounds, solver comparisons
and graph-derived test chains."""

import itertools

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .core import stationary_distribution
from .exceptions import NotConvergedError, ValidationError
from .linsolve import FORMULATIONS, METHODS, ProjectionSystem, SolverOptions, solve, spectral_bounds
from .manifolds import FixedStationaryManifold, as_generator
from .validation import check_square


def largest_scc(adjacency):
    """Indices of the largest strongly connected component of a digraph."""
    G = sp.csr_matrix(check_square(adjacency, "adjacency") if not sp.issparse(adjacency) else adjacency)
    _, labels = connected_components(G, directed=True, connection="strong")
    biggest = np.argmax(np.bincount(labels))
    return np.nonzero(labels == biggest)[0]


def graph_chain(adjacency):
    """Out-degree random walk on the largest strongly connected component.

    Returns
    -------
    A : ndarray
        Row-stochastic, irreducible transition matrix ``diag(G 1)^{-1} G``.
    nodes : ndarray
        Indices of the retained vertices in the original graph.
    """
    G = adjacency.toarray() if sp.issparse(adjacency) else np.asarray(adjacency, dtype=float)
    G = check_square(G, "adjacency")
    if np.any(G < 0):
        raise ValidationError("adjacency weights must be nonnegative")
    nodes = largest_scc(G != 0)
    G = G[np.ix_(nodes, nodes)]
    deg = G.sum(axis=1)
    if nodes.size < 2 or np.any(deg <= 0):
        raise ValidationError("the largest strongly connected component is trivial")
    return G / deg[:, None], nodes


def random_graph(n, density, seed=None):
    """Seeded Erdős–Rényi digraph adjacency without self-loops."""
    rng = as_generator(seed)
    G = (rng.random((n, n)) < density).astype(float)
    np.fill_diagonal(G, 0.0)
    return G


def bounds_report(pi, samples=50, seed=None, zero_tol=1e-12):
    """Compare dense eigenvalues of the projection system with the bounds.

    For ``samples`` random points of the fixed-stationary manifold of
    ``pi``, returns one dict per point with the extreme nonzero
    eigenvalues, the two bounds and a ``violation`` flag.
    """
    M = FixedStationaryManifold(pi)
    rng = as_generator(seed)
    out = []
    for _ in range(samples):
        S = M.rand_point(rng)
        sys = ProjectionSystem(S, M.pi)
        b = spectral_bounds(sys)
        ev = np.linalg.eigvalsh(sys.dense())
        nz = ev[np.abs(ev) > zero_tol * np.max(np.abs(ev))]
        lo, hi = float(nz.min()), float(nz.max())
        slack = 1e-12 * max(1.0, hi)
        out.append(
            {
                "lambda_min_nonzero": lo,
                "lambda_max": hi,
                "lambda_lower_bound": b.lower,
                "lambda_upper_bound": b.upper,
                "lower_bound_simplified": None if np.isnan(b.lower_simplified) else b.lower_simplified,
                "violation": bool(lo < b.lower - slack or hi > b.upper + slack),
            }
        )
    return out


def solver_grid(include_correction=True):
    """All (formulation, method, correction) combinations."""
    corr = (False, True) if include_correction else (False,)
    return [SolverOptions(formulation=f, method=m, correction=c) for f, m, c in itertools.product(FORMULATIONS, METHODS, corr)]


def compare_solvers(S, pi, rhs_count=5, seed=None, configs=None, max_iter=None):
    """Iteration counts of each solver configuration on random right-hand sides.

    Returns a list of dicts with ``formulation``, ``method``,
    ``correction``, ``iterations`` (list) and ``mean_iterations``. Runs that
    do not converge are reported with ``iterations=None``.
    """
    rng = as_generator(seed)
    sys = ProjectionSystem(S, pi)
    rhs = []
    for _ in range(rhs_count):
        Z = rng.standard_normal(S.shape)
        rhs.append((Z.sum(axis=1), Z.T @ sys.pi))
    rows = []
    for opts in configs or solver_grid():
        if max_iter is not None:
            opts = SolverOptions(**{**opts.__dict__, "max_iter": max_iter})
        its = []
        fallback = False
        try:
            for c, d in rhs:
                ab = solve(sys, c, d, opts)
                its.append(int(ab.stats.iterations))
                fallback |= bool(ab.stats.fallback)
        except NotConvergedError:
            its = None
        rows.append(
            {
                "formulation": opts.formulation,
                "method": opts.method,
                "correction": opts.correction,
                "iterations": its,
                "mean_iterations": None if its is None else float(np.mean(its)),
                "preconditioner_fallback": fallback,
            }
        )
    return rows


def graph_instance(n=200, density=0.02, seed=0):
    """Projection system data for a seeded graph chain: ``(S, pi, A)``."""
    A, _ = graph_chain(random_graph(n, density, seed))
    pi = stationary_distribution(A)
    S = FixedStationaryManifold(pi).rand_point(seed)
    return S, pi, A
