import numpy as np

from helpers import random_pi
from stochroot.diagnostics import (
    bounds_report,
    compare_solvers,
    graph_chain,
    graph_instance,
    largest_scc,
    random_graph,
    solver_grid,
)


def test_largest_scc():
    G = np.zeros((6, 6))
    for a, b in [(0, 1), (1, 2), (2, 0), (3, 4), (4, 3), (2, 3), (5, 5)]:
        G[a, b] = 1
    assert list(largest_scc(G)) == [0, 1, 2]


def test_graph_chain():
    A, nodes = graph_chain(random_graph(60, 0.08, seed=1))
    assert np.max(np.abs(A.sum(axis=1) - 1)) <= 1e-14
    assert len(nodes) == A.shape[0] >= 2
    # irreducible: every state reachable from every other
    R = np.linalg.matrix_power(np.eye(len(nodes)) + (A > 0), len(nodes))
    assert np.all(R > 0)


def test_bounds_report(rng):
    rows = bounds_report(random_pi(rng, 6), samples=8, seed=0)
    assert len(rows) == 8
    assert not any(r["violation"] for r in rows)
    for r in rows:
        assert r["lambda_lower_bound"] <= r["lambda_min_nonzero"] <= r["lambda_max"] <= r["lambda_upper_bound"]


def test_compare_solvers(rng):
    S, pi, _ = graph_instance(n=80, density=0.06, seed=0)
    rows = compare_solvers(S, pi, rhs_count=2, seed=1)
    assert len(rows) == len(solver_grid()) == 20
    assert all(r["iterations"] is not None for r in rows)
    plain = {(r["formulation"], r["correction"]): r["mean_iterations"] for r in rows if r["method"] == "cg"}
    for r in rows:
        if r["method"].startswith("pcg"):
            assert r["mean_iterations"] <= plain[(r["formulation"], r["correction"])]


def test_upper_bound_tighter_on_average(rng):
    rows = bounds_report(random_pi(rng, 12), samples=20, seed=3)
    lower = np.mean([r["lambda_lower_bound"] / r["lambda_min_nonzero"] for r in rows])
    upper = np.mean([r["lambda_max"] / r["lambda_upper_bound"] for r in rows])
    assert upper > lower
