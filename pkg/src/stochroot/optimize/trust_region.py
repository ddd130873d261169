"""Riemannian trust-region method with a truncated-CG inner solver."""

import numpy as np

from ..exceptions import NotConvergedError, RetractionOverflowError, StepTooLargeError
from .options import OptimOptions, _RunRecorder

#: Acceptance threshold on the model agreement ratio.
RHO_ACCEPT = 0.1
#: Inner stopping rule ``||r|| <= ||r0|| min(||r0||^theta, kappa)``.
KAPPA = 0.1
THETA = 1.0

RETRACTION_ERRORS = (RetractionOverflowError, StepTooLargeError, NotConvergedError, FloatingPointError)


def _model(inner, grad, eta, Heta):
    return inner(grad, eta) + 0.5 * inner(eta, Heta)


def truncated_cg(problem, X, grad, radius, max_inner):
    """Steihaug-Toint CG on the quadratic model in the Fisher metric.

    Returns ``(eta, Heta, iterations, exit)`` where ``exit`` is one of
    ``"boundary"``, ``"negative_curvature"``, ``"residual"``,
    ``"model_increase"`` or ``"max_inner"``. The last exit guards against
    rounding: an update that raises the model value is discarded.
    """
    M = problem.manifold
    inner = lambda a, b: M.inner(X, a, b)  # noqa: E731
    eta = M.zero_vector(X)
    Heta = M.zero_vector(X)
    r = grad.copy()
    r_r = inner(r, r)
    r0_norm = np.sqrt(r_r)
    delta = -r
    e_Pe = 0.0
    e_Pd = 0.0
    d_Pd = r_r
    target = r0_norm * min(r0_norm**THETA, KAPPA)
    model = 0.0
    for j in range(1, max_inner + 1):
        Hdelta = problem.rhess(X, delta)
        d_Hd = inner(delta, Hdelta)
        alpha = r_r / d_Hd if d_Hd != 0 else np.inf
        e_Pe_new = e_Pe + 2.0 * alpha * e_Pd + alpha * alpha * d_Pd
        if d_Hd <= 0 or e_Pe_new >= radius * radius:
            tau = (-e_Pd + np.sqrt(e_Pd * e_Pd + d_Pd * (radius * radius - e_Pe))) / d_Pd
            eta_b = eta + tau * delta
            Heta_b = Heta + tau * Hdelta
            if j > 1 and _model(inner, grad, eta_b, Heta_b) > model:
                return eta, Heta, j, "model_increase"
            return eta_b, Heta_b, j, "negative_curvature" if d_Hd <= 0 else "boundary"
        eta_new = eta + alpha * delta
        Heta_new = Heta + alpha * Hdelta
        model_new = _model(inner, grad, eta_new, Heta_new)
        if model_new > model:
            return eta, Heta, j, "model_increase"
        e_Pe, eta, Heta, model = e_Pe_new, eta_new, Heta_new, model_new
        r = r + alpha * Hdelta
        r_r_new = inner(r, r)
        if np.sqrt(r_r_new) <= target:
            return eta, Heta, j, "residual"
        beta = r_r_new / r_r
        r_r = r_r_new
        delta = -r + beta * delta
        e_Pd = beta * (e_Pd + alpha * d_Pd)
        d_Pd = r_r + beta * beta * d_Pd
    return eta, Heta, max_inner, "max_inner"


def trust_region(problem, X0, options=None, callback=None):
    """Minimize ``problem.cost`` over ``problem.manifold`` from ``X0``.

    Parameters
    ----------
    problem : PthRootProblem
    X0 : ndarray
        Starting point on the manifold.
    options : OptimOptions, optional
    callback : callable, optional
        Called as ``callback(iteration, cost, gradnorm)`` after every outer
        iteration, including the initial point (iteration 0).

    Returns
    -------
    OptimResult
        ``cost_trace`` holds the cost of the current iterate after every
        outer iteration and is non-increasing.
    """
    opts = options or OptimOptions()
    M = problem.manifold
    dim = M.dim
    radius = opts.tr_initial_radius if opts.tr_initial_radius is not None else np.sqrt(dim) / 8.0
    max_radius = opts.tr_max_radius if opts.tr_max_radius is not None else np.sqrt(dim)
    max_inner = opts.tcg_max_inner if opts.tcg_max_inner is not None else dim
    eps = np.finfo(float).eps

    rec = _RunRecorder(problem, callback, opts.verbosity, "tr")
    X = np.array(X0, dtype=float)
    f = problem.cost(X)
    grad = problem.rgrad(X)
    gn = M.norm(X, grad)
    rec.record(0, f, gn)
    inner_total = 0

    for k in range(1, opts.max_outer + 1):
        if gn <= opts.tolgradnorm:
            return rec.result(X, k - 1, "gradtol", inner_total)
        eta, Heta, n_inner, exit_ = truncated_cg(problem, X, grad, radius, max_inner)
        inner_total += n_inner
        try:
            X_new = M.retract(X, eta)
            f_new = problem.cost(X_new)
        except RETRACTION_ERRORS:
            X_new, f_new = None, np.inf
        if not np.isfinite(f_new):
            rho = -np.inf
        else:
            reg = 1e3 * eps * max(1.0, abs(f))
            num = f - f_new + reg
            den = -(M.inner(X, grad, eta) + 0.5 * M.inner(X, eta, Heta)) + reg
            rho = num / den if den > 0 else -np.inf

        if rho < 0.25:
            radius /= 4.0
        elif rho > 0.75 and exit_ in ("boundary", "negative_curvature"):
            radius = min(2.0 * radius, max_radius)

        if rho > RHO_ACCEPT and f_new <= f:
            X, f = X_new, f_new
            grad = problem.rgrad(X)
            gn = M.norm(X, grad)
        elif rho >= 0.25:
            # rejected only because rounding raised the cost
            radius /= 4.0
        rec.record(k, f, gn)
        if radius < opts.min_radius and gn > opts.tolgradnorm:
            return rec.result(X, k, "radius_collapse", inner_total)

    stop = "gradtol" if gn <= opts.tolgradnorm else "maxiter"
    return rec.result(X, opts.max_outer, stop, inner_total)
