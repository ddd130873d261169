import numpy as np
import pytest

from helpers import random_pi
from stochroot.core import stationary_distribution
from stochroot.exceptions import NonPositiveInputError, NotConvergedError
from stochroot.matrixgen import credit_risk_matrix
from stochroot.roots import credit_risk_start, perturb_irreducible
from stochroot.sinkhorn import ScalingPair, modified_sinkhorn, sinkhorn_balance


def test_fixed_point():
    A = np.full((3, 3), 1 / 3)
    B, sc = sinkhorn_balance(A, np.full(3, 1.0), np.full(3, 1.0))
    assert np.max(np.abs(B - A)) <= 1e-15
    assert np.allclose(sc.d1, 1.0) and np.allclose(sc.d2, 1.0)


def test_doubly_stochastic(rng):
    A = rng.random((4, 4)) + 0.01
    r = np.full(4, 0.25)
    B, sc = sinkhorn_balance(A, r, r)
    assert np.max(np.abs(B.sum(axis=1) - r)) <= 1e-10
    assert np.max(np.abs(B.sum(axis=0) - r)) <= 1e-10
    assert sc.d1[0] == 1.0
    assert np.all(B > 0)


def test_random_marginals(rng):
    A = rng.random((5, 5)) + 0.01
    pi = random_pi(rng, 5)
    B, _ = sinkhorn_balance(A, pi, pi)
    assert np.max(np.abs(B.sum(axis=1) - pi)) <= 1e-10
    assert np.max(np.abs(B.sum(axis=0) - pi)) <= 1e-10


def test_gauge_invariance(rng):
    A = rng.random((4, 4)) + 0.1
    pi = random_pi(rng, 4)
    B, sc = sinkhorn_balance(A, pi, pi)
    for t in (1e-3, 0.7, 42.0):
        other = ScalingPair(t * sc.d1, sc.d2 / t)
        assert np.max(np.abs(other.apply(A) - B)) <= 1e-13


def test_errors(rng):
    A = rng.random((3, 3)) + 0.1
    A[0, 1] = 0.0
    r = np.full(3, 1 / 3)
    with pytest.raises(NonPositiveInputError):
        sinkhorn_balance(A, r, r)
    with pytest.raises(NotConvergedError):
        sinkhorn_balance(rng.random((3, 3)) + 0.1, r, r, tol=1e-30, max_iter=5)
    with pytest.raises(ValueError):
        sinkhorn_balance(np.ones((3, 3)), r, 2 * r)


def test_modified_marginals(rng):
    A = rng.random((6, 6)) + 0.01
    pi = random_pi(rng, 6)
    S, _ = modified_sinkhorn(A, pi)
    assert np.max(np.abs(S.sum(axis=1) - 1)) <= 1e-10
    assert np.max(np.abs(pi @ S - pi)) <= 1e-10
    assert np.all(S > 0)
    # S is a diagonal scaling of A
    ratio = S / A
    assert np.allclose(ratio / ratio[:, :1], (ratio / ratio[:, :1])[0], rtol=1e-12)


def test_modified_fixed_point(rng):
    pi = random_pi(rng, 5)
    S, _ = modified_sinkhorn(rng.random((5, 5)) + 0.01, pi)
    S2, sc = modified_sinkhorn(S, pi)
    assert np.linalg.norm(S2 - S) <= 1e-12
    assert np.allclose(sc.d1, 1.0, atol=1e-11) and np.allclose(sc.d2, 1.0, atol=1e-11)


def test_credit_risk_start():
    pi = stationary_distribution(perturb_irreducible(credit_risk_matrix(), 1e-4))
    X0 = credit_risk_start(pi, 1e-4)
    assert np.max(np.abs(X0.sum(axis=1) - 1)) <= 1e-10
    assert np.max(np.abs(pi @ X0 - pi)) <= 1e-10
