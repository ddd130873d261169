"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``criterion k: PASS|FAIL`` line (also collected into the
terminal summary by ``conftest.py``) before asserting. Run this file alone
with ``pytest tests/test_acceptance.py -s`` to see the lines inline.
"""

import itertools
import time

import numpy as np
import pytest

from helpers import circulant_A, circulant_root
from stochroot.core import stationary_distribution
from stochroot.diagnostics import bounds_report, compare_solvers, graph_instance
from stochroot.linsolve import FORMULATIONS, METHODS, ProjectionSystem, SolverOptions, solve_block_desingularized
from stochroot.manifolds import FixedStationaryManifold, MultinomialManifold
from stochroot.matrixgen import TABLE_CLASSES, GeneratorSpec, generate
from stochroot.optimize import OptimOptions
from stochroot.problem import PthRootProblem
from stochroot.roots import compute_root, credit_risk_root

RESULTS = {}


def report(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)
    return ok


def taylor_slope(prob, M, X, xi, retract, ts=np.logspace(-2, -4, 9)):
    f0 = prob.cost(X)
    g = M.inner(X, prob.rgrad(X), xi)
    h = M.inner(X, prob.rhess(X, xi), xi)
    err = np.array([abs(prob.cost(retract(X, t * xi)) - f0 - t * g - 0.5 * t * t * h) for t in ts])
    return float(np.polyfit(np.log(ts), np.log(err), 1)[0])


def test_criterion_1_circulant_multinomial():
    A = circulant_A(1 / 6)
    t0 = time.perf_counter()
    res = compute_root(A, 2, manifold="multinomial", optimizer="tr", seed=0, options=OptimOptions(tolgradnorm=1e-12))
    wall = time.perf_counter() - t0
    ok = res.residual_fro <= 1e-8 and res.stationary_err_inf <= 1e-12 and wall < 5
    detail = f"residual {res.residual_fro:.3e}, stationary error {res.stationary_err_inf:.3e}, {wall:.2f} s"
    assert report(1, ok, detail)


def test_criterion_2_exact_root():
    M = FixedStationaryManifold(np.full(3, 1 / 3))
    prob = PthRootProblem(circulant_A(1 / 6), 2, M)
    X = circulant_root(1 / 6)
    f, g = prob.cost(X), M.norm(X, prob.rgrad(X))
    assert report(2, f <= 1e-25 and g <= 1e-12, f"cost {f:.3e}, gradient norm {g:.3e}")


def test_criterion_3_stationary_preservation():
    t0 = time.perf_counter()
    worst = 0.0
    lines = []
    for cls, p in itertools.product(TABLE_CLASSES, (2, 5)):
        A = generate(GeneratorSpec(cls, n=20, p=p, seed=0))
        fs = compute_root(A, p, manifold="fixed_stationary", seed=1)
        mn = compute_root(A, p, manifold="multinomial", seed=1)
        worst = max(worst, fs.stationary_err_inf)
        lines.append(
            f"    {cls:18s} p={p}  S_pi: res {fs.residual_fro:.2e} stat {fs.stationary_err_inf:.1e}"
            f" | S_n: res {mn.residual_fro:.2e} stat {mn.stationary_err_inf:.1e}"
        )
    wall = time.perf_counter() - t0
    print("\n".join(lines))
    ok = worst <= 1e-12 and wall < 180
    assert report(3, ok, f"worst fixed-stationary error {worst:.2e} over 12 runs, {wall:.1f} s")


def test_criterion_4_spectral_bounds():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    violations = total = 0
    rel_lo = rel_hi = 0.0
    for k, cls in enumerate(TABLE_CLASSES):
        n = int(rng.integers(3, 51))
        A = generate(GeneratorSpec(cls, n=n, p=2, seed=k))
        rows = bounds_report(stationary_distribution(A), samples=50, seed=k)
        violations += sum(r["violation"] for r in rows)
        total += len(rows)
        rel_lo += sum(r["lambda_lower_bound"] / r["lambda_min_nonzero"] for r in rows)
        rel_hi += sum(r["lambda_max"] / r["lambda_upper_bound"] for r in rows)
    wall = time.perf_counter() - t0
    detail = (
        f"{violations} violations in {total} points, mean tightness lower/lambda_min {rel_lo / total:.3f}"
        f" lambda_max/upper {rel_hi / total:.3f}, {wall:.1f} s"
    )
    assert report(4, violations == 0 and wall < 120, detail)


def test_criterion_5_solver_cross_validation():
    rng = np.random.default_rng(5)
    configs = [SolverOptions(formulation=f, method=m, correction=c) for f, m, c in itertools.product(FORMULATIONS, METHODS, (False, True))]
    worst = worst_direct = 0.0
    fallbacks = 0
    for _ in range(20):
        w = rng.random(10) + 0.1
        pi = w / w.sum()
        S = FixedStationaryManifold(pi).rand_point(rng)
        Z = rng.standard_normal((10, 10))
        outs = []
        for opts in configs:
            M = FixedStationaryManifold(pi, opts)
            outs.append(M.project(S, Z))
            fallbacks += sum(s.fallback for s in M.solver_log if s.method != "refine")
        for a, b in itertools.combinations(outs, 2):
            worst = max(worst, float(np.max(np.abs(a - b))))
        sys = ProjectionSystem(S, pi)
        c, d = Z.sum(axis=1), Z.T @ pi
        ab = solve_block_desingularized(sys, c, d)
        worst_direct = max(worst_direct, float(np.linalg.norm(sys.matvec(ab.stacked) - np.concatenate([c, d]))))
    ok = worst <= 1e-8 and worst_direct <= 1e-10 and fallbacks == 0
    detail = f"pairwise max diff {worst:.2e}, desingularized residual {worst_direct:.2e}, fallbacks {fallbacks}"
    assert report(5, ok, detail)


def test_criterion_6_derivatives():
    rng = np.random.default_rng(6)
    fd_err = ident_err = sym_err = 0.0
    slopes = []
    for p in (2, 3, 5):
        B = rng.random((4, 4)) + 0.1
        A = B / B.sum(axis=1)[:, None]
        for M in (MultinomialManifold(4), FixedStationaryManifold(stationary_distribution(A))):
            prob = PthRootProblem(A, p, M)
            X = M.rand_point(rng)
            G = prob.egrad(X)
            h = 1e-6
            fd = np.zeros_like(X)
            for i, j in itertools.product(range(4), range(4)):
                E = np.zeros_like(X)
                E[i, j] = h
                fd[i, j] = (prob.cost(X + E) - prob.cost(X - E)) / (2 * h)
            fd_err = max(fd_err, np.linalg.norm(fd - G) / np.linalg.norm(G))
            v = rng.standard_normal(X.shape)
            Hfd = (prob.egrad(X + h * v) - prob.egrad(X - h * v)) / (2 * h)
            Hv = prob.ehess(X, v)
            fd_err = max(fd_err, np.linalg.norm(Hfd - Hv) / np.linalg.norm(Hv))

            xi, eta = M.rand_tangent(X, rng), M.rand_tangent(X, rng)
            d = np.sum(G * xi)
            ident_err = max(ident_err, abs(M.inner(X, prob.rgrad(X), xi) - d) / max(1.0, abs(d)))
            a = M.inner(X, prob.rhess(X, xi), eta)
            b = M.inner(X, xi, prob.rhess(X, eta))
            sym_err = max(sym_err, abs(a - b) / max(1.0, abs(a)))
            slopes.append(taylor_slope(prob, M, X, xi, M.retract_second_order))
    ok = fd_err <= 1e-5 and ident_err <= 1e-10 and sym_err <= 1e-8 and min(slopes) >= 2.7
    detail = (
        f"finite differences {fd_err:.1e}, gradient identity {ident_err:.1e}, "
        f"self-adjointness {sym_err:.1e}, min Taylor slope {min(slopes):.2f}"
    )
    assert report(6, ok, detail)


def test_criterion_7_retractions():
    rng = np.random.default_rng(7)
    w = rng.random(5) + 0.1
    pi = w / w.sum()
    center = 0.0
    ratios = []
    for M in (MultinomialManifold(5), FixedStationaryManifold(pi), FixedStationaryManifold(pi, retraction="linear")):
        S = M.rand_point(rng)
        center = max(center, float(np.max(np.abs(M.retract(S, np.zeros_like(S)) - S))))
        xi = M.rand_tangent(S, rng)
        err = [np.linalg.norm((M.retract(S, t * xi) - S) / t - xi) for t in (1e-4, 1e-5)]
        if M.name == "fixed_stationary" and M.retraction == "linear":
            continue  # S + t xi is exact; there is no first-order error to measure
        ratios.append(err[0] / err[1])
    ok = center <= 1e-12 and all(5 <= r <= 20 for r in ratios)
    detail = f"centering error {center:.1e}, rigidity ratios " + ", ".join(f"{r:.2f}" for r in ratios)
    assert report(7, ok, detail)


def test_criterion_8_credit_risk():
    expected = np.array([0.0002, 0.0007, 0.0012, 0.0009, 0.0005, 0.0006, 0.0001, 0.9957])
    t0 = time.perf_counter()
    pi_t, res = credit_risk_root(gamma=1e-4, p=2)
    wall = time.perf_counter() - t0
    X = res.X
    marg = max(np.max(np.abs(X.sum(axis=1) - 1)), np.max(np.abs(pi_t @ X - pi_t)))
    ok = np.array_equal(np.round(pi_t, 4), expected) and marg <= 1e-10 and wall < 30
    detail = f"pi_tilde {np.round(pi_t, 4).tolist()}, marginals {marg:.1e}, residual {res.residual_fro:.3e}, {wall:.1f} s"
    assert report(8, ok, detail)


def test_criterion_9_preconditioned_iterations():
    S, pi, _ = graph_instance(n=300, density=0.02, seed=0)
    configs = [
        SolverOptions(formulation=f, method=m, correction=c)
        for f, m, c in itertools.product(FORMULATIONS, ("cg", "pcg_ichol", "pcg_neumann"), (False, True))
    ]
    rows = compare_solvers(S, pi, rhs_count=5, seed=9, configs=configs)
    plain = {(r["formulation"], r["correction"]): r["mean_iterations"] for r in rows if r["method"] == "cg"}
    bad = [r for r in rows if r["mean_iterations"] is None or r["mean_iterations"] > plain[(r["formulation"], r["correction"])]]
    summary = ", ".join(
        f"{r['formulation']}{'+c' if r['correction'] else ''}/{r['method']}={r['mean_iterations']:.0f}"
        for r in rows
        if r["mean_iterations"] is not None
    )
    detail = (
        f"n={S.shape[0]} graph chain, {summary}; wall-clock profiles and exact iteration curves are excluded"
    )
    assert report(9, not bad, detail)
