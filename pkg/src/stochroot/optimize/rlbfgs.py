"""Riemannian limited-memory BFGS with a backtracking line search."""

from collections import deque

import numpy as np

from .options import OptimOptions, _RunRecorder
from .trust_region import RETRACTION_ERRORS

#: Sufficient-decrease constant of the Armijo test.
ARMIJO_C1 = 1e-4
#: Maximum number of step halvings per line search.
MAX_BACKTRACK = 25
#: Curvature safeguard ``<s, y> > CAUTIOUS * ||s|| ||y||``.
CAUTIOUS = 1e-10


def _two_loop(M, X, grad, memory):
    """``-H grad`` from the stored ``(s, y, <s, y>)`` pairs."""
    q = grad.copy()
    coeffs = []
    for s, y, sy in reversed(memory):
        a = M.inner(X, s, q) / sy
        coeffs.append(a)
        q = q - a * y
    if memory:
        s, y, sy = memory[-1]
        q = (sy / M.inner(X, y, y)) * q
    for (s, y, sy), a in zip(memory, reversed(coeffs)):
        b = M.inner(X, y, q) / sy
        q = q + (a - b) * s
    return -q


def _line_search(problem, X, f, slope, direction, t0):
    M = problem.manifold
    t = t0
    for _ in range(MAX_BACKTRACK):
        try:
            X_new = M.retract(X, t * direction)
            f_new = problem.cost(X_new)
        except RETRACTION_ERRORS:
            f_new = np.inf
        if np.isfinite(f_new) and f_new <= f + ARMIJO_C1 * t * slope:
            return t, X_new, f_new
        t *= 0.5
    return None


def rlbfgs(problem, X0, options=None, callback=None):
    """Minimize ``problem.cost`` with Riemannian L-BFGS.

    Memory pairs are moved to each new iterate by tangent projection. When
    the quasi-Newton direction fails the line search the memory is cleared
    and steepest descent is tried; if that fails too the run stops with
    ``stop_reason="linesearch_failure"``.
    """
    opts = options or OptimOptions()
    M = problem.manifold
    rec = _RunRecorder(problem, callback, opts.verbosity, "lbfgs")
    X = np.array(X0, dtype=float)
    f = problem.cost(X)
    grad = problem.rgrad(X)
    gn = M.norm(X, grad)
    rec.record(0, f, gn)
    memory = deque(maxlen=opts.lbfgs_memory)

    for k in range(1, opts.max_outer + 1):
        if gn <= opts.tolgradnorm:
            return rec.result(X, k - 1, "gradtol")
        direction = _two_loop(M, X, grad, memory)
        slope = M.inner(X, grad, direction)
        steepest = not memory or slope >= 0
        if slope >= 0:
            memory.clear()
            direction, slope = -grad, -gn * gn
        t0 = min(1.0, 1.0 / gn) if steepest else 1.0
        found = _line_search(problem, X, f, slope, direction, t0)
        if found is None and not steepest:
            memory.clear()
            direction, slope = -grad, -gn * gn
            found = _line_search(problem, X, f, slope, direction, min(1.0, 1.0 / gn))
        if found is None:
            rec.record(k, f, gn)
            return rec.result(X, k, "linesearch_failure")
        t, X_new, f_new = found

        grad_new = problem.rgrad(X_new)
        s = M.transport(X, X_new, t * direction)
        y = grad_new - M.transport(X, X_new, grad)
        moved = deque(maxlen=opts.lbfgs_memory)
        for s_old, y_old, _ in memory:
            s_t = M.transport(X, X_new, s_old)
            y_t = M.transport(X, X_new, y_old)
            sy_t = M.inner(X_new, s_t, y_t)
            if sy_t > CAUTIOUS * M.norm(X_new, s_t) * M.norm(X_new, y_t):
                moved.append((s_t, y_t, sy_t))
        memory = moved
        sy = M.inner(X_new, s, y)
        if sy > CAUTIOUS * M.norm(X_new, s) * M.norm(X_new, y):
            memory.append((s, y, sy))

        X, f, grad = X_new, f_new, grad_new
        gn = M.norm(X, grad)
        rec.record(k, f, gn)

    stop = "gradtol" if gn <= opts.tolgradnorm else "maxiter"
    return rec.result(X, opts.max_outer, stop)
