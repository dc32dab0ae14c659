"""Extrapolated proximal gradient (EPG) steps.

One EPG step jointly minimizes, over a candidate ``x`` and extrapolation
coefficients ``beta``, the model

    g(x) + f(y) + <grad f(y), x - y> + 0.5 ||x - y||_T^2,  y = x_base + D beta.

Three ways of computing it are provided: the exact closed form for quadratic
``f`` (a prox step in the identity-minus-rank-R metric), alternating
minimization in ``x`` and ``beta``, and backtracking over a short list of
``beta`` samples that stops at the first candidate satisfying the inexact
decrease certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .metric import (DiagonalMetric, HessianOnSpan, MetricConstructionError,
                     as_operator, build_q_rank_r)
from .prox import prox_diag, prox_metric

__all__ = [
    "EPGResult",
    "as_directions",
    "extrapolate",
    "model_value",
    "beta_star",
    "prox_grad_step",
    "epg_step_closed_form",
    "epg_step_alternating",
    "backtrack_beta",
    "backtrack_lipschitz",
]

_STAGNATION = 1e-12
_LIPSCHITZ_SLACK = 1e-12


@dataclass
class EPGResult:
    x_next: np.ndarray
    beta: np.ndarray
    y: np.ndarray
    model_value: float
    l_used: float = math.nan
    n_beta_trials: int = 1
    n_l_backtracks: int = 0
    mode: str = "closed_form"
    f_y: float = field(default=math.nan, repr=False)
    grad_y: np.ndarray | None = field(default=None, repr=False)
    metric: object = field(default=None, repr=False)


def as_directions(D, n: int) -> np.ndarray:
    """Coerce `D` to an ``(n, R)`` array; ``None`` means ``R = 0``."""
    if D is None:
        return np.zeros((n, 0))
    D = np.asarray(D, dtype=np.float64)
    if D.ndim == 1:
        D = D.reshape(-1, 1)
    if D.ndim != 2 or D.shape[0] != n:
        raise ValueError(f"directions of shape {D.shape} do not match N={n}")
    return D


def extrapolate(x, D, beta) -> np.ndarray:
    """``x + D beta``."""
    x = np.asarray(x, dtype=np.float64)
    D = as_directions(D, x.size)
    beta = np.atleast_1d(np.asarray(beta, dtype=np.float64))
    if beta.size != D.shape[1]:
        raise ValueError(f"{beta.size} coefficients for {D.shape[1]} "
                         "directions")
    if beta.size == 0:
        return x.copy()
    return x + D @ beta


def model_value(problem, T, x, y, f_y=None, grad_y=None) -> float:
    """``g(x) + f(y) + <grad f(y), x - y> + 0.5 ||x - y||_T^2``."""
    from .prox import g_value

    gx = g_value(problem.g, x)
    if math.isinf(gx):
        return math.inf
    if f_y is None or grad_y is None:
        f_y, grad_y = problem.f.value_grad(y)
    d = x - y
    return float(gx + f_y + grad_y @ d + 0.5 * d @ T.apply(d))


def beta_star(D, M, x, x_base) -> np.ndarray:
    """Minimizer ``(D^T M D)^{-1} D^T M (x - x_base)`` of the beta model.

    `M` is ``T - H`` given as a dense matrix, a metric object or a callable.
    """
    x = np.asarray(x, dtype=np.float64)
    D = as_directions(D, x.size)
    if D.shape[1] == 0:
        return np.zeros(0)
    Mop = as_operator(M)
    MD = np.column_stack([Mop(D[:, i]) for i in range(D.shape[1])])
    G = D.T @ MD
    G = 0.5 * (G + G.T)
    try:
        cf = sla.cho_factor(G, lower=True)
    except np.linalg.LinAlgError as exc:
        raise MetricConstructionError(
            "D^T M D is not positive definite") from exc
    return sla.cho_solve(cf, MD.T @ (x - x_base))


def prox_grad_step(problem, T, y, grad_y) -> np.ndarray:
    """``prox_diag(g, T, y - T^{-1} grad f(y))``."""
    return prox_diag(problem.g, T, y - T.solve(grad_y))


def _hess_columns(f, x, D):
    return np.column_stack([f.hessvec(x, D[:, i]) for i in range(D.shape[1])])


def epg_step_closed_form(problem, T: DiagonalMetric, D, x_base,
                         grad_base=None) -> EPGResult:
    """Exact EPG step for quadratic ``f``.

    The joint minimum is a prox step from ``x_base`` in the metric
    ``Q = T - U^T U`` that equals the Hessian on ``span(D)`` and ``T`` on
    its orthogonal complement; the optimal coefficients are recovered from
    the normal equations of the beta model afterwards.

    Raises
    ------
    MetricConstructionError
        If ``D^T (T - H) D`` is not positive definite or ``D`` is rank
        deficient.
    """
    f = problem.f
    if not f.is_quadratic:
        raise ValueError("closed-form EPG steps need a quadratic f")
    x_base = np.asarray(x_base, dtype=np.float64)
    D = as_directions(D, x_base.size)
    if grad_base is None:
        grad_base = f.grad(x_base)
    if D.shape[1] == 0:
        x_next = prox_grad_step(problem, T, x_base, grad_base)
        beta = np.zeros(0)
        y = x_base.copy()
        Q = T
    else:
        Y = _hess_columns(f, x_base, D)
        Q = build_q_rank_r(T, HessianOnSpan(D, Y))
        x_next = prox_metric(problem.g, Q, x_base - Q.solve(grad_base))

        def M(v):
            return T.apply(v) - f.hessvec(x_base, v)

        beta = beta_star(D, M, x_next, x_base)
        y = extrapolate(x_base, D, beta)
    f_y, grad_y = f.value_grad(y)
    m = model_value(problem, T, x_next, y, f_y, grad_y)
    return EPGResult(x_next, beta, y, m, mode="closed_form", f_y=f_y,
                     grad_y=grad_y, metric=Q)


def _beta_newton(problem, T, D, x, y, beta, f_y, grad_y, J0):
    """One safeguarded Newton step on the beta model at fixed ``x``."""
    f = problem.f
    r = x - y
    HD = _hess_columns(f, y, D)
    MD = T.diag[:, None] * D - HD
    grad_b = -(MD.T @ r)
    G = 0.5 * (D.T @ MD + (D.T @ MD).T)
    try:
        step = -sla.cho_solve(sla.cho_factor(G, lower=True), grad_b)
    except np.linalg.LinAlgError:
        scale = float(np.sum(D * (T.diag[:, None] * D)))
        step = -grad_b / max(scale, np.finfo(float).tiny)
    for _ in range(30):
        b_new = beta + step
        y_new = extrapolate(y - D @ beta, D, b_new)
        fy, gy = f.value_grad(y_new)
        d = x - y_new
        J = fy + gy @ d + 0.5 * d @ T.apply(d)
        if J < J0:
            return b_new
        step = 0.5 * step
    return beta


def epg_step_alternating(problem, T: DiagonalMetric, D, x_base,
                         n_rounds: int = 50, beta0=None) -> EPGResult:
    """EPG step by alternating minimization in ``x`` and ``beta``.

    Each round takes a proximal gradient step at ``y = x_base + D beta``
    and then, unless it is the last round, re-optimizes ``beta`` for the
    new ``x``: exactly for quadratic ``f``, by one safeguarded Newton step
    otherwise. Starting from ``beta = 0`` the first round is a plain
    forward-backward step. Stops early once the model decreases by less
    than ``1e-12`` in a round.
    """
    f = problem.f
    x_base = np.asarray(x_base, dtype=np.float64)
    D = as_directions(D, x_base.size)
    R = D.shape[1]
    beta = np.zeros(R) if beta0 is None else np.array(beta0, dtype=float)

    def M(v):
        return T.apply(v) - f.hessvec(x_base, v)

    prev = math.inf
    rounds = 0
    while True:
        rounds += 1
        y = extrapolate(x_base, D, beta)
        f_y, grad_y = f.value_grad(y)
        x = prox_grad_step(problem, T, y, grad_y)
        m = model_value(problem, T, x, y, f_y, grad_y)
        if (rounds >= n_rounds or R == 0
                or prev - m < _STAGNATION):
            break
        prev = m
        if f.is_quadratic:
            try:
                beta = beta_star(D, M, x, x_base)
            except MetricConstructionError:
                break
        else:
            from .prox import g_value
            J0 = m - g_value(problem.g, x)
            beta = _beta_newton(problem, T, D, x, y, beta, f_y, grad_y, J0)
    return EPGResult(x, beta, y, m, n_beta_trials=rounds, mode="alternating",
                     f_y=f_y, grad_y=grad_y, metric=T)


def backtrack_beta(problem, T: DiagonalMetric, d, x_base, samples,
                   f_base=None) -> EPGResult:
    """Inexact EPG step along one direction `d`.

    Tries the coefficients in `samples` in order and accepts the first
    ``(x, beta)`` whose model value does not exceed the objective at
    ``x_base``. `samples` must end with 0, which is always accepted; if
    rounding makes the ``beta = 0`` prox point fail the test by a few ulps,
    ``x_base`` itself (which meets it with equality) is returned.
    """
    samples = [float(s) for s in samples]
    if not samples or samples[-1] != 0.0:
        raise ValueError("beta samples must end with 0")
    f = problem.f
    x_base = np.asarray(x_base, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64).reshape(-1)
    if f_base is None:
        f_base = problem.objective(x_base)
    if not np.any(d):
        samples = samples[:1]
    for i, b in enumerate(samples):
        y = x_base.copy() if b == 0.0 else x_base + b * d
        f_y, grad_y = f.value_grad(y)
        x = prox_grad_step(problem, T, y, grad_y)
        m = model_value(problem, T, x, y, f_y, grad_y)
        if m <= f_base:
            return EPGResult(x, np.array([b]), y, m, n_beta_trials=i + 1,
                             mode="backtracked", f_y=f_y, grad_y=grad_y,
                             metric=T)
    # only reachable through rounding in the beta = 0 (or d = 0) test
    return EPGResult(x_base.copy(), np.array([samples[-1]]), y, f_base,
                     n_beta_trials=len(samples), mode="backtracked",
                     f_y=f_y, grad_y=grad_y, metric=T)


def backtrack_lipschitz(f, y, x_next, L: float, growth: float = 2.0,
                        f_y=None, grad_y=None, f_x=None):
    """Check ``f(x) <= f(y) + <grad f(y), x - y> + (L/2) ||x - y||^2``.

    Returns ``(accepted, L_new)`` with ``L_new = growth * L`` on rejection.
    """
    if not L > 0 or not growth > 1:
        raise ValueError("need L > 0 and growth > 1")
    if f_y is None or grad_y is None:
        f_y, grad_y = f.value_grad(y)
    if f_x is None:
        f_x = f.value(x_next)
    d = x_next - y
    rhs = f_y + grad_y @ d + 0.5 * L * (d @ d)
    ok = f_x <= rhs + _LIPSCHITZ_SLACK * (1.0 + abs(f_y))
    return bool(ok), (L if ok else growth * L)
