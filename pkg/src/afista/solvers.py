"""Iterative solvers for ``min f + g`` with trace recording.

Every solver takes a :class:`~afista.problems.CompositeProblem` and a
:class:`~afista.core.SolverConfig` and returns a :class:`SolverRun`. Row 0 of
the trace is the starting point; its stationarity residual is NaN because no
step has been taken yet.

The base metric is the scalar ``T = t I`` with ``t = 1 / step_alpha`` (or
``(1 + a_margin) L`` when only a Lipschitz constant is known). The reported
``l_value`` is ``L = t / (1 + a_margin)``, the curvature that the Lipschitz
backtracking test checks; a failed test multiplies ``t`` by
``lipschitz_growth``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import SolverConfig, TraceRecord
from .epg import (backtrack_beta, backtrack_lipschitz, epg_step_alternating,
                  epg_step_closed_form, model_value, prox_grad_step)
from .metric import (DiagonalMetric, MetricConstructionError, MetricError,
                     sr1_memory_metric)
from .prox import prox_diag, prox_metric

__all__ = [
    "SolverRun",
    "SolverError",
    "InternalConsistencyError",
    "theta_sequence",
    "stationarity_residual",
    "rate_bound",
    "mm_step",
    "solve_fbs",
    "solve_ipiano",
    "solve_mfista",
    "solve_afista",
    "solve_mm_afista",
    "solve_adaptive_monotone_fista",
    "solve_adaptive_tseng",
    "SOLVERS",
    "MONOTONE_SOLVERS",
    "get_solver",
]

_MAX_BACKTRACKS = 200
_TSENG_SLACK = 1e-10


class SolverError(RuntimeError):
    """An oracle or prox evaluation failed inside a solver iteration."""


class InternalConsistencyError(RuntimeError):
    """A condition that holds by construction was violated (a bug)."""


@dataclass
class SolverRun:
    trace: list
    final_x: np.ndarray
    status: str
    solver_id: str
    info: dict = field(default_factory=dict)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.trace])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.stationarity_residual for r in self.trace])


def theta_sequence(k: int, theta0: float = 1.0) -> float:
    """``theta_k = 2 / (k + 2 / theta0)``; ``2 / (k + 2)`` for ``theta0 = 1``.

    Satisfies ``(1 - theta_{k+1}) / theta_{k+1}^2 <= 1 / theta_k^2``. By
    convention ``theta_{-1} = theta_0``.
    """
    if not 0.0 < theta0 <= 1.0:
        raise ValueError("theta0 must lie in (0, 1]")
    if k < 0:
        return float(theta0)
    return 2.0 / (k + 2.0 / theta0)


def rate_bound(k: int, L: float, dist0_sq: float, gap0: float,
               theta0: float = 1.0) -> float:
    """Objective-gap bound of the accelerated variants at iteration `k`.

    ``theta_k^2 / (1 - theta_k) * (L/2 ||x0 - x*||^2
    + (1 - theta0) / theta0^2 * gap0)`` for ``k >= 1``; ``gap0`` at ``k = 0``.
    """
    if k == 0:
        return float(gap0)
    th = theta_sequence(k, theta0)
    return th * th / (1.0 - th) * (0.5 * L * dist0_sq
                                   + (1.0 - theta0) / theta0 ** 2 * gap0)


def stationarity_residual(problem, x_next, y, metric, grad_y=None,
                          grad_next=None) -> float:
    """``||grad f(x_next) - grad f(y) - Q (x_next - y)||``.

    For ``x_next`` a prox step at ``y`` in the metric ``Q`` this vector lies
    in the subdifferential of ``f + g`` at ``x_next``.
    """
    f = problem.f
    if grad_y is None:
        grad_y = f.grad(y)
    if grad_next is None:
        grad_next = f.grad(x_next)
    return float(np.linalg.norm(grad_next - grad_y
                                - metric.apply(x_next - y)))


class _Recorder:
    def __init__(self, solver_id, problem, config, x0, F0, L0):
        self.solver_id = solver_id
        self.config = config
        self.F0 = F0
        self.t0 = time.perf_counter()
        self.trace = [TraceRecord(0, 0.0, F0, self._norm(F0), math.nan,
                                  L0, 0)]

    def _norm(self, F):
        if self.F0 == 0 or not math.isfinite(self.F0):
            return F
        return F / self.F0

    def add(self, k, F, res, L, nb, beta=()):
        self.trace.append(TraceRecord(
            k, time.perf_counter() - self.t0, F, self._norm(F), res, L, nb,
            tuple(float(b) for b in beta)))

    def stop(self, k, res):
        if res <= self.config.tol_residual:
            return "converged"
        if time.perf_counter() - self.t0 >= self.config.time_budget:
            return "time_budget"
        if k >= self.config.max_iters:
            return "iter_budget"
        return None


def _start(problem, config):
    if problem.x0 is not None:
        x0 = np.array(problem.x0, dtype=np.float64)
    else:
        x0 = np.zeros(problem.f.dim)
    F0 = problem.objective(x0)
    if not math.isfinite(F0):
        raise ValueError("objective is not finite at the starting point")
    return x0, F0


def _initial_t(problem, config) -> float:
    if config.step_alpha is not None:
        return 1.0 / config.step_alpha
    L = getattr(problem.f, "lipschitz", None)
    if L is None or not L > 0:
        raise ValueError("set step_alpha or give f a positive lipschitz "
                         "constant")
    return (1.0 + config.a_margin) * L


def _global_L(problem, config) -> float:
    """Fixed curvature for the accelerated variants."""
    if config.step_alpha is not None:
        return 1.0 / config.step_alpha
    f = problem.f
    L = getattr(f, "l_max", None)
    if L is None:
        L = getattr(f, "lipschitz", None)
    if L is None or not L > 0:
        raise ValueError("set step_alpha or give f a positive lipschitz "
                         "constant")
    return (1.0 + config.a_margin) * L


def _L_of(t, config):
    return t / (1.0 + config.a_margin)


def _run(solver_id, body):
    """Call ``body()``, attaching the solver id to unexpected failures."""
    try:
        return body()
    except (InternalConsistencyError, SolverError):
        raise
    except Exception as exc:
        raise SolverError(f"{solver_id}: {exc}") from exc


def _lipschitz_ok(problem, config, y, x, t, f_y, grad_y, f_x):
    if not config.backtrack_lipschitz:
        return True
    ok, _ = backtrack_lipschitz(problem.f, y, x, _L_of(t, config),
                                config.lipschitz_growth, f_y, grad_y, f_x)
    return ok


def _prox_grad_bt(problem, config, y, f_y, grad_y, t, shift=None):
    """Prox-gradient step at `y` with Lipschitz backtracking on ``t``.

    `shift` is added to the forward point (inertial term of iPiano).
    """
    n = y.size
    nb = 0
    while True:
        T = DiagonalMetric.scalar(t, n)
        if shift is None:
            x = prox_grad_step(problem, T, y, grad_y)
        else:
            x = prox_diag(problem.g, T, y - T.solve(grad_y) + shift)
        f_x, grad_x = problem.f.value_grad(x)
        if _lipschitz_ok(problem, config, y, x, t, f_y, grad_y, f_x):
            return x, f_x, grad_x, t, nb
        t *= config.lipschitz_growth
        nb += 1
        if nb > _MAX_BACKTRACKS:
            raise SolverError("Lipschitz backtracking did not terminate")


def _maybe_decrease(t, config):
    if config.lipschitz_decrease and config.backtrack_lipschitz:
        return t / config.lipschitz_growth
    return t


# ---------------------------------------------------------------- baselines


def solve_fbs(problem, config: SolverConfig | None = None) -> SolverRun:
    """Forward-backward splitting ``x+ = prox(x - alpha grad f(x))``."""
    config = config or SolverConfig()
    x, F = _start(problem, config)
    t = _initial_t(problem, config)
    rec = _Recorder("fbs", problem, config, x, F, _L_of(t, config))
    f_x, grad_x = problem.f.value_grad(x)

    def body():
        nonlocal x, F, t, f_x, grad_x
        k = 0
        status = rec.stop(0, math.inf)
        while status is None:
            k += 1
            t = _maybe_decrease(t, config)
            y, f_y, grad_y = x, f_x, grad_x
            x, f_x, grad_x, t, nb = _prox_grad_bt(problem, config, y, f_y,
                                                  grad_y, t)
            F = problem.objective(x)
            res = stationarity_residual(problem, x, y,
                                        DiagonalMetric.scalar(t, x.size),
                                        grad_y, grad_x)
            rec.add(k, F, res, _L_of(t, config), nb)
            status = rec.stop(k, res)
        return status

    status = _run("fbs", body)
    return SolverRun(rec.trace, x, status, "fbs")


def solve_ipiano(problem, config: SolverConfig | None = None) -> SolverRun:
    """Inertial prox-gradient ``prox(x - alpha grad f(x) + beta (x - x_prev))``.

    ``beta`` is ``config.inertia``; ``x_prev = x0`` at the first step.
    """
    config = config or SolverConfig()
    x, F = _start(problem, config)
    x_prev = x.copy()
    t = _initial_t(problem, config)
    rec = _Recorder("ipiano", problem, config, x, F, _L_of(t, config))
    f_x, grad_x = problem.f.value_grad(x)
    b = config.inertia

    def body():
        nonlocal x, x_prev, F, t, f_x, grad_x
        k = 0
        status = rec.stop(0, math.inf)
        while status is None:
            k += 1
            t = _maybe_decrease(t, config)
            y, f_y, grad_y = x, f_x, grad_x
            shift = b * (x - x_prev) if b != 0 else None
            x_new, f_x, grad_x, t, nb = _prox_grad_bt(
                problem, config, y, f_y, grad_y, t, shift)
            x_prev, x = x, x_new
            F = problem.objective(x)
            w = grad_x - grad_y - t * (x - y)
            if shift is not None:
                w = w + t * shift
            res = float(np.linalg.norm(w))
            rec.add(k, F, res, _L_of(t, config), nb)
            status = rec.stop(k, res)
        return status

    status = _run("ipiano", body)
    return SolverRun(rec.trace, x, status, "ipiano")


def solve_mfista(problem, config: SolverConfig | None = None) -> SolverRun:
    """Monotone FISTA.

    Extrapolates with ``beta_k = theta_k (1 / theta_{k-1} - 1)``, takes a
    prox-gradient step there and keeps it only if the objective does not
    increase; otherwise a plain prox-gradient step from ``x_k`` is taken.
    """
    config = config or SolverConfig()
    x, F = _start(problem, config)
    x_prev = x.copy()
    t = _initial_t(problem, config)
    rec = _Recorder("mfista", problem, config, x, F, _L_of(t, config))
    f_x, grad_x = problem.f.value_grad(x)
    n_reject = 0

    def body():
        nonlocal x, x_prev, F, t, f_x, grad_x, n_reject
        k = 0
        status = rec.stop(0, math.inf)
        while status is None:
            th_prev = theta_sequence(k - 1, config.theta0)
            th = theta_sequence(k, config.theta0)
            k += 1
            t = _maybe_decrease(t, config)
            beta = th * (1.0 / th_prev - 1.0)
            nb_total = 0
            if beta != 0 and np.any(x != x_prev):
                y = x + beta * (x - x_prev)
                f_y, grad_y = problem.f.value_grad(y)
                c, f_c, grad_c, t, nb = _prox_grad_bt(problem, config, y,
                                                      f_y, grad_y, t)
                nb_total += nb
                F_c = problem.objective(c)
                accepted = F_c <= F
            else:
                accepted = False
            if not accepted:
                if beta != 0:
                    n_reject += 1
                beta = 0.0
                y, f_y, grad_y = x, f_x, grad_x
                c, f_c, grad_c, t, nb = _prox_grad_bt(problem, config, y,
                                                      f_y, grad_y, t)
                nb_total += nb
                F_c = problem.objective(c)
            x_prev, x = x, c
            F, f_x, grad_x = F_c, f_c, grad_c
            res = stationarity_residual(problem, x, y,
                                        DiagonalMetric.scalar(t, x.size),
                                        grad_y, grad_x)
            rec.add(k, F, res, _L_of(t, config), nb_total, (beta,))
            status = rec.stop(k, res)
        return status

    status = _run("mfista", body)
    return SolverRun(rec.trace, x, status, "mfista",
                     {"n_rejected_extrapolations": n_reject})


# ---------------------------------------------------------- adaptive FISTA


def _resolve_mode(problem, config) -> str:
    mode = config.afista_mode
    if mode == "auto":
        return "closed_form" if problem.f.is_quadratic else "backtracked"
    if mode == "closed_form" and not problem.f.is_quadratic:
        raise ValueError("closed_form mode needs a quadratic f")
    return mode


def _directions(history, rank):
    """Up to `rank` most recent nonzero iterate differences as columns."""
    cols = []
    for a, b in zip(history[::-1], history[-2::-1]):
        if len(cols) == rank:
            break
        d = a - b
        if np.any(d):
            cols.append(d)
    if not cols:
        return None
    return np.column_stack(cols)


def _epg(problem, config, mode, T, x, D, F):
    if mode == "closed_form":
        try:
            return epg_step_closed_form(problem, T, D, x)
        except (MetricConstructionError, MetricError):
            pass
    elif mode == "alternating":
        return epg_step_alternating(problem, T, D, x,
                                    config.alternating_rounds)
    d = np.zeros(x.size) if D is None else D[:, 0]
    return backtrack_beta(problem, T, d, x, config.beta_samples, f_base=F)


def solve_afista(problem, config: SolverConfig | None = None) -> SolverRun:
    """Adaptive FISTA with optimized extrapolation and Lipschitz backtracking.

    Each iteration computes an EPG step from ``x_k`` along
    ``D = [x_k - x_{k-1}, ...]`` (``config.rank`` columns): the exact
    closed form for quadratic ``f`` (falling back to the sampled step when
    the metric cannot be built), otherwise the first ``beta`` in
    ``config.beta_samples`` that passes the decrease certificate. The step
    is repeated with a larger ``t`` while the Lipschitz test fails.
    """
    config = config or SolverConfig()
    mode = _resolve_mode(problem, config)
    x, F = _start(problem, config)
    history = [x.copy()]
    t = _initial_t(problem, config)
    rec = _Recorder("afista", problem, config, x, F, _L_of(t, config))
    n = x.size
    rank = config.rank if mode != "backtracked" else 1

    def body():
        nonlocal x, F, t
        k = 0
        status = rec.stop(0, math.inf)
        while status is None:
            k += 1
            t = _maybe_decrease(t, config)
            D = _directions(history, rank)
            nb = 0
            while True:
                T = DiagonalMetric.scalar(t, n)
                r = _epg(problem, config, mode, T, x, D, F)
                f_x, grad_x = problem.f.value_grad(r.x_next)
                if _lipschitz_ok(problem, config, r.y, r.x_next, t, r.f_y,
                                 r.grad_y, f_x):
                    break
                t *= config.lipschitz_growth
                nb += 1
                if nb > _MAX_BACKTRACKS:
                    raise SolverError("Lipschitz backtracking did not "
                                      "terminate")
            x = r.x_next
            history.append(x.copy())
            del history[:-(rank + 1)]
            F = problem.objective(x)
            res = stationarity_residual(problem, x, r.y, T, r.grad_y, grad_x)
            rec.add(k, F, res, _L_of(t, config), nb, r.beta)
            status = rec.stop(k, res)
        return status

    status = _run("afista", body)
    return SolverRun(rec.trace, x, status, "afista", {"mode": mode})


def mm_step(problem, T: DiagonalMetric, x, x_prev, grad_x, grad_prev,
            rho: float):
    """One zero-memory SR1 prox step from `x`.

    Builds ``Q = T - rho u u^T`` from ``d = x - x_prev`` and
    ``y = grad_x - grad_prev`` (``Q = T`` when the SR1 curvature test or
    the positive-definiteness check fails) and returns
    ``(prox_Q(x - Q^{-1} grad_x), Q)``.
    """
    if x_prev is None or grad_prev is None or rho == 0:
        Q = T
    else:
        Q = sr1_memory_metric(T, x - x_prev, grad_x - grad_prev, rho)
    return prox_metric(problem.g, Q, x - Q.solve(grad_x)), Q


def solve_mm_afista(problem, config: SolverConfig | None = None) -> SolverRun:
    """Majorize-minimize variant with a zero-memory SR1 metric (ZeroSR1).

    A step is accepted when the Lipschitz test holds at ``L = t/(1+a)`` and
    ``F(x+) <= F(x) - 0.5 ||x+ - x||^2_{Q - L}`` together with
    ``F(x+) <= F(x)``. A failed Lipschitz test grows ``t``; a failed decrease
    test with the SR1 metric retries with ``Q = T`` at the same ``t``, for
    which the majorizer alone implies the decrease.
    """
    config = config or SolverConfig()
    x, F = _start(problem, config)
    t = _initial_t(problem, config)
    rec = _Recorder("zerosr1", problem, config, x, F, _L_of(t, config))
    n = x.size
    f_x, grad_x = problem.f.value_grad(x)
    x_prev = grad_prev = None
    n_sr1 = 0

    def body():
        nonlocal x, F, t, f_x, grad_x, x_prev, grad_prev, n_sr1
        k = 0
        status = rec.stop(0, math.inf)
        while status is None:
            k += 1
            t = _maybe_decrease(t, config)
            nb = 0
            use_sr1 = True
            while True:
                T = DiagonalMetric.scalar(t, n)
                if use_sr1:
                    x_new, Q = mm_step(problem, T, x, x_prev, grad_x,
                                       grad_prev, config.rho)
                else:
                    Q = T
                    x_new = prox_grad_step(problem, T, x, grad_x)
                f_new, grad_new = problem.f.value_grad(x_new)
                if not _lipschitz_ok(problem, config, x, x_new, t, f_x,
                                     grad_x, f_new):
                    t *= config.lipschitz_growth
                    nb += 1
                    if nb > _MAX_BACKTRACKS:
                        raise SolverError("Lipschitz backtracking did not "
                                          "terminate")
                    continue
                F_new = problem.objective(x_new)
                if Q is T or not config.backtrack_lipschitz:
                    break
                s = x_new - x
                decr = 0.5 * (s @ Q.apply(s) - _L_of(t, config) * (s @ s))
                slack = 1e-12 * (1.0 + abs(F))
                if F_new <= F - decr + slack and F_new <= F:
                    break
                use_sr1 = False
            if Q is not T:
                n_sr1 += 1
            res = stationarity_residual(problem, x_new, x, Q, grad_x,
                                        grad_new)
            x_prev, grad_prev = x, grad_x
            x, f_x, grad_x, F = x_new, f_new, grad_new, F_new
            rec.add(k, F, res, _L_of(t, config), nb)
            status = rec.stop(k, res)
        return status

    status = _run("zerosr1", body)
    return SolverRun(rec.trace, x, status, "zerosr1",
                     {"n_sr1_steps": n_sr1})


# ------------------------------------------------------ accelerated (convex)


def _require_convex(problem, name):
    if not problem.convex:
        raise ValueError(f"{name} requires convex f and g")


def _rate_setup(config, x0, F0, L):
    if config.f_star is None or config.x_star is None:
        return None
    dist0_sq = float(np.sum((x0 - np.asarray(config.x_star)) ** 2))
    return dist0_sq, F0 - config.f_star


def _exact_or_sampled(problem, config, T, x_base, d, F_base):
    """Exact EPG step (quadratic f) or the sampled fallback."""
    if problem.f.is_quadratic:
        try:
            D = d if np.any(d) else None
            return epg_step_closed_form(problem, T, D, x_base), True
        except (MetricConstructionError, MetricError):
            pass
    return backtrack_beta(problem, T, d, x_base, config.beta_samples,
                          f_base=F_base), False


def solve_adaptive_monotone_fista(problem, config: SolverConfig | None = None
                                  ) -> SolverRun:
    """Monotone accelerated scheme with an optimized-extrapolation candidate.

    Per iteration: the auxiliary point ``y_hat`` is built from ``z_k``,
    ``z_{k-1}`` and the previous plain prox point ``x_hat_k``; ``x_hat_{k+1}``
    is the prox-gradient step at ``y_hat``; ``x_plus`` is the EPG step from
    ``z_k`` along ``z_k - z_{k-1}``; ``z_{k+1}`` is whichever of the two has
    the lower objective (``x_plus`` on ties). All steps use ``T = L I``
    with the fixed global ``L``.
    """
    config = config or SolverConfig()
    _require_convex(problem, "adaptive monotone FISTA")
    z, F = _start(problem, config)
    L = _global_L(problem, config)
    n = z.size
    T = DiagonalMetric.scalar(L, n)
    rec = _Recorder("amfista", problem, config, z, F, L)
    z_prev = z.copy()
    x_hat = z.copy()
    rate = _rate_setup(config, z, F, L)
    bounds = [rate[1]] if rate else []

    def body():
        nonlocal z, z_prev, x_hat, F
        k = 0
        status = rec.stop(0, math.inf)
        while status is None:
            th = theta_sequence(k, config.theta0)
            th_prev = theta_sequence(k - 1, config.theta0)
            y_hat = (z + th * (1.0 - th_prev) / th_prev * (z - z_prev)
                     + th / th_prev * (x_hat - z))
            f_yh, g_yh = problem.f.value_grad(y_hat)
            x_hat = prox_grad_step(problem, T, y_hat, g_yh)
            F_hat = problem.objective(x_hat)
            r, _ = _exact_or_sampled(problem, config, T, z, z - z_prev, F)
            F_plus = problem.objective(r.x_next)
            k += 1
            z_prev = z
            if F_plus <= F_hat:
                z, F, y, g_y, beta = r.x_next, F_plus, r.y, r.grad_y, r.beta
            else:
                z, F, y, g_y, beta = x_hat, F_hat, y_hat, g_yh, ()
            res = stationarity_residual(problem, z, y, T, g_y)
            rec.add(k, F, res, L, 0, beta)
            if rate:
                bounds.append(rate_bound(k, L, rate[0], rate[1],
                                         config.theta0))
            status = rec.stop(k, res)
        return status

    status = _run("amfista", body)
    info = {"L": L}
    if rate:
        info["rate_bound"] = bounds
    return SolverRun(rec.trace, z, status, "amfista", info)


def solve_adaptive_tseng(problem, config: SolverConfig | None = None
                         ) -> SolverRun:
    """Tseng-type accelerated scheme with an EPG selection step.

    ``y_hat = (1 - theta) x_plus + theta x_hat``; ``x_hat`` takes a prox
    step of weight ``theta L`` around itself using ``grad f(y_hat)``;
    ``z = (1 - theta) x_plus + theta x_hat_new``; the new ``x_plus`` is the
    EPG step from ``x_plus`` along ``x_hat - x_plus``. Because
    ``beta = theta`` reproduces ``y_hat``, the exact step's model value
    cannot exceed the model at ``(z, y_hat)``; this is checked every
    iteration. Sampled (non-quadratic) steps that miss it are replaced by
    ``z``.
    """
    config = config or SolverConfig()
    _require_convex(problem, "adaptive Tseng acceleration")
    xp, F = _start(problem, config)
    L = _global_L(problem, config)
    n = xp.size
    T = DiagonalMetric.scalar(L, n)
    rec = _Recorder("atseng", problem, config, xp, F, L)
    x_hat = xp.copy()
    rate = _rate_setup(config, xp, F, L)
    bounds = [rate[1]] if rate else []
    n_fallback = 0

    def body():
        nonlocal xp, x_hat, F, n_fallback
        k = 0
        status = rec.stop(0, math.inf)
        while status is None:
            th = theta_sequence(k, config.theta0)
            y_hat = (1.0 - th) * xp + th * x_hat
            f_yh, g_yh = problem.f.value_grad(y_hat)
            Tth = DiagonalMetric.scalar(th * L, n)
            x_hat_new = prox_diag(problem.g, Tth, x_hat - Tth.solve(g_yh))
            z = (1.0 - th) * xp + th * x_hat_new
            rhs = model_value(problem, T, z, y_hat, f_yh, g_yh)
            r, exact = _exact_or_sampled(problem, config, T, xp, x_hat - xp,
                                         F)
            slack = _TSENG_SLACK * (1.0 + abs(rhs))
            if r.model_value <= rhs + slack:
                x_new, y_new, g_y, beta = r.x_next, r.y, r.grad_y, r.beta
            elif exact:
                raise InternalConsistencyError(
                    f"iteration {k}: EPG model {r.model_value!r} exceeds "
                    f"the model at the convex combination {rhs!r}")
            else:
                n_fallback += 1
                x_new, y_new, g_y, beta = z, y_hat, g_yh, (th,)
            k += 1
            xp, x_hat = x_new, x_hat_new
            F = problem.objective(xp)
            res = stationarity_residual(problem, xp, y_new, T, g_y)
            rec.add(k, F, res, L, 0, beta)
            if rate:
                bounds.append(rate_bound(k, L, rate[0], rate[1],
                                         config.theta0))
            status = rec.stop(k, res)
        return status

    status = _run("atseng", body)
    info = {"L": L, "n_fallback": n_fallback}
    if rate:
        info["rate_bound"] = bounds
    return SolverRun(rec.trace, xp, status, "atseng", info)


SOLVERS = {
    "fbs": solve_fbs,
    "ipiano": solve_ipiano,
    "mfista": solve_mfista,
    "afista": solve_afista,
    "zerosr1": solve_mm_afista,
    "amfista": solve_adaptive_monotone_fista,
    "atseng": solve_adaptive_tseng,
}
MONOTONE_SOLVERS = ("afista", "zerosr1", "fbs", "mfista", "amfista")

_ALIASES = {"mm_afista": "zerosr1", "adaptive_monotone": "amfista",
            "adaptive_tseng": "atseng"}


def get_solver(name: str):
    key = _ALIASES.get(name, name)
    try:
        return SOLVERS[key]
    except KeyError:
        raise KeyError(f"unknown solver {name!r}; choose from "
                       f"{', '.join(SOLVERS)}") from None
