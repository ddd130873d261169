import numpy as np
import pytest

from helpers import random_pi
from stochroot.exceptions import RetractionOverflowError, StepTooLargeError
from stochroot.linsolve import AlphaBeta, SolverOptions
from stochroot.manifolds import FixedStationaryManifold, MultinomialManifold


def kkt_projection(S, Z, pi=None):
    """Fisher-orthogonal projection from a dense constrained least-squares solve."""
    n = S.shape[0]
    rows = [np.kron(np.eye(n), np.ones(n))]  # row sums of vec(xi), row-major
    if pi is not None:
        rows.append(np.kron(pi, np.eye(n)))  # pi^T xi
    C = np.vstack(rows)
    Winv = np.diag(S.ravel())
    z = Z.ravel()
    lam = np.linalg.pinv(C @ Winv @ C.T) @ (C @ z)
    return (z - Winv @ C.T @ lam).reshape(n, n)


def manifolds(n=5, seed=0):
    rng = np.random.default_rng(seed)
    pi = random_pi(rng, n)
    return [MultinomialManifold(n), FixedStationaryManifold(pi)]


@pytest.fixture(params=["multinomial", "fixed_stationary"])
def M(request):
    rng = np.random.default_rng(7)
    if request.param == "multinomial":
        return MultinomialManifold(5)
    return FixedStationaryManifold(random_pi(rng, 5))


def _pi(M):
    return getattr(M, "pi", None)


class TestProjection:
    def test_kkt_oracle(self, M, rng):
        S = M.rand_point(rng)
        Z = rng.standard_normal(S.shape)
        assert np.max(np.abs(M.project(S, Z) - kkt_projection(S, Z, _pi(M)))) <= 1e-10

    def test_tangent_and_idempotent(self, M, rng):
        S = M.rand_point(rng)
        xi = M.project(S, rng.standard_normal(S.shape))
        assert np.max(np.abs(xi.sum(axis=1))) <= 1e-12
        if _pi(M) is not None:
            assert np.max(np.abs(M.pi @ xi)) <= 1e-12
        assert np.max(np.abs(M.project(S, xi) - xi)) <= 1e-11

    def test_self_adjoint(self, M, rng):
        S = M.rand_point(rng)
        Z, W = rng.standard_normal((2,) + S.shape)
        a = M.inner(S, M.project(S, Z), W)
        b = M.inner(S, Z, M.project(S, W))
        assert abs(a - b) <= 1e-10 * max(1.0, abs(a))

    def test_doubly_stochastic_oracle(self, rng):
        n = 4
        M = FixedStationaryManifold(np.full(n, 1 / n))
        S = M.rand_point(rng)
        xi = M.project(S, rng.standard_normal((n, n)))
        assert np.max(np.abs(xi.sum(axis=0))) <= 1e-12
        assert np.max(np.abs(xi.sum(axis=1))) <= 1e-12

    def test_null_vector_gauge(self, rng):
        M = manifolds()[1]
        S = M.rand_point(rng)
        a, b = rng.standard_normal(5), rng.standard_normal(5)
        for t in (-3.0, 0.5, 10.0):
            assert np.max(np.abs(M.normal(S, a - t * M.pi, b + t) - M.normal(S, a, b))) <= 1e-13

    @pytest.mark.parametrize("formulation", ["block", "schur"])
    @pytest.mark.parametrize("method", ["direct", "cg", "lsqr", "pcg_ichol", "pcg_neumann"])
    def test_all_solvers(self, formulation, method, rng):
        pi = random_pi(rng, 6)
        ref = FixedStationaryManifold(pi, SolverOptions(method="direct", formulation="block"))
        M = FixedStationaryManifold(pi, SolverOptions(formulation=formulation, method=method))
        S = ref.rand_point(rng)
        Z = rng.standard_normal(S.shape)
        assert np.max(np.abs(M.project(S, Z) - ref.project(S, Z))) <= 1e-8


class TestHessian:
    def test_gauge_invariance(self, rng):
        pi = random_pi(rng, 5)
        M = FixedStationaryManifold(pi)
        S = M.rand_point(rng)
        G, H = rng.standard_normal((2, 5, 5))
        xi = M.rand_tangent(S, rng)
        base = M.ehess2rhess(S, G, H, xi)
        ab = M.solve_normal(S, G * S)
        M._grad_ab = (S, G, AlphaBeta(ab.alpha - 2.5 * pi, ab.beta + 2.5))
        shifted = M.ehess2rhess(S, G, H, xi)
        assert np.max(np.abs(shifted - base)) <= 1e-10 * max(1.0, np.max(np.abs(base)))

    def test_linear_in_direction(self, M, rng):
        S = M.rand_point(rng)
        G = rng.standard_normal(S.shape)
        xi, eta = M.rand_tangent(S, rng), M.rand_tangent(S, rng)
        Hx, He = rng.standard_normal((2,) + S.shape)
        lhs = M.ehess2rhess(S, G, 2 * Hx - He, 2 * xi - eta)
        rhs = 2 * M.ehess2rhess(S, G, Hx, xi) - M.ehess2rhess(S, G, He, eta)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.max(np.abs(lhs)))

    def test_tangent_output(self, M, rng):
        S = M.rand_point(rng)
        G, H = rng.standard_normal((2,) + S.shape)
        h = M.ehess2rhess(S, G, H, M.rand_tangent(S, rng))
        assert np.max(np.abs(h.sum(axis=1))) <= 1e-11


class TestRetraction:
    def test_centering(self, M, rng):
        S = M.rand_point(rng)
        assert np.max(np.abs(M.retract(S, np.zeros_like(S)) - S)) <= 1e-12

    @pytest.mark.parametrize("second_order", [False, True])
    def test_rigidity(self, M, rng, second_order):
        S = M.rand_point(rng)
        xi = M.rand_tangent(S, rng)
        R = M.retract_second_order if second_order else M.retract

        def err(t):
            return np.linalg.norm((R(S, t * xi) - S) / t - xi)

        ratio = err(1e-4) / err(1e-5)
        assert 5.0 <= ratio <= 20.0

    def test_feasible(self, M, rng):
        S = M.rand_point(rng)
        Y = M.retract(S, M.rand_tangent(S, rng))
        assert np.all(Y > 0)
        assert M.constraint_residual(Y) <= 1e-10

    def test_overflow_guard(self, M, rng):
        S = M.rand_point(rng)
        with pytest.raises(RetractionOverflowError):
            M.retract(S, 1e4 * M.rand_tangent(S, rng))

    def test_linear_retraction(self, rng):
        pi = random_pi(rng, 4)
        M = FixedStationaryManifold(pi, retraction="linear")
        S = M.rand_point(rng)
        xi = 1e-3 * M.rand_tangent(S, rng)
        Y = M.retract(S, xi)
        assert np.array_equal(Y, S + xi)
        assert M.constraint_residual(Y) <= 1e-12
        with pytest.raises(StepTooLargeError):
            M.retract(S, -2 * S)

    def test_second_order_stays_feasible(self, M, rng):
        S = M.rand_point(rng)
        Y = M.retract_second_order(S, 0.01 * M.rand_tangent(S, rng))
        assert M.constraint_residual(Y) <= 1e-12


class TestPoints:
    def test_rand_point(self, M):
        S = M.rand_point(3)
        assert np.all(S > 0)
        assert M.constraint_residual(S) <= 1e-12
        assert np.array_equal(S, M.rand_point(3))

    def test_dims(self):
        assert MultinomialManifold(4).dim == 12
        assert FixedStationaryManifold(np.full(4, 0.25)).dim == 9

    def test_rgrad_is_projection(self, M, rng):
        S = M.rand_point(rng)
        G = rng.standard_normal(S.shape)
        g = M.egrad2rgrad(S, G)
        xi = M.rand_tangent(S, rng)
        # Riesz identity: <grad, xi>_S equals the Euclidean directional derivative
        assert abs(M.inner(S, g, xi) - np.sum(G * xi)) <= 1e-11

    def test_bad_pi(self):
        with pytest.raises(ValueError):
            FixedStationaryManifold(np.array([0.5, 0.6]))
        with pytest.raises(ValueError):
            FixedStationaryManifold(np.full(3, 1 / 3), retraction="cayley")


class TestInnerAndNormalForms:
    def test_inner_scalar_oracle(self, M, rng):
        S = M.rand_point(rng)
        xi, eta = M.rand_tangent(S, rng), M.rand_tangent(S, rng)
        ref = sum(xi[i, j] * eta[i, j] / S[i, j] for i in range(M.n) for j in range(M.n))
        assert abs(M.inner(S, xi, eta) - ref) <= 1e-13 * max(1.0, abs(ref))
        assert M.inner(S, xi, xi) > 0
        assert M.inner(S, xi, np.zeros_like(xi)) == 0.0

    def test_inner_uniform_point(self, rng):
        n = 4
        S = np.full((n, n), 1 / n)
        xi, eta = rng.standard_normal((2, n, n))
        assert MultinomialManifold(n).inner(S, xi, eta) == pytest.approx(n * np.sum(xi * eta), rel=1e-14)

    def test_multinomial_normal_forms(self, rng):
        M = MultinomialManifold(4)
        S = M.rand_point(rng)
        a = rng.standard_normal(4)
        assert np.max(np.abs(M.project(S, a[:, None] * S))) <= 1e-15
        assert np.max(np.abs(M.egrad2rgrad(S, np.full((4, 4), 3.0)))) <= 1e-15
        assert not M.egrad2rgrad(S, np.zeros((4, 4))).any()
        xi = M.project(S, rng.standard_normal((4, 4)))
        assert np.max(np.abs(M.project(S, xi) - xi)) <= 1e-15
        Y = M.retract(S, 0.3 * M.rand_tangent(S, rng))
        assert np.max(np.abs(Y.sum(axis=1) - 1)) <= 1e-14

    def test_fixed_stationary_normal_forms(self, rng):
        pi = random_pi(rng, 4)
        M = FixedStationaryManifold(pi)
        S = M.rand_point(rng)
        a, b = rng.standard_normal((2, 4))
        assert np.max(np.abs(M.project(S, M.normal(S, a, b)))) <= 1e-11
        xi = M.rand_tangent(S, rng)
        assert np.max(np.abs(M.project(S, xi) - xi)) <= 1e-11
        assert np.max(np.abs(M.egrad2rgrad(S, np.zeros((4, 4))))) == 0.0

    def test_orthogonality_of_residual(self, M, rng):
        S = M.rand_point(rng)
        Z = rng.standard_normal(S.shape)
        eta = M.rand_tangent(S, rng)
        val = M.inner(S, Z - M.project(S, Z), eta)
        assert abs(val) <= 1e-10 * np.linalg.norm(Z) * M.norm(S, eta)

    def test_hessian_zero_direction(self, M, rng):
        S = M.rand_point(rng)
        G = rng.standard_normal(S.shape)
        assert np.max(np.abs(M.ehess2rhess(S, G, np.zeros_like(S), np.zeros_like(S)))) <= 1e-14
