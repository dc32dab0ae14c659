"""Independent reference computations used by the acceptance checks.

Each suite draws seeded random instances, compares a library routine with an
oracle that does not share its code path (alternating minimization, grid or
golden-section search, a long plain forward-backward run) and returns a list
of :class:`OracleResult`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .core import (SolverConfig, descent_lemma_gap, finite_diff_gradient,
                   make_rng)
from .epg import (beta_star, epg_step_alternating, epg_step_closed_form,
                  model_value)
from .metric import DiagonalMetric, HessianOnSpan, LowRankMetric, build_q_rank_r
from .problems import (CompositeProblem, QuadraticProblem, make_network_problem,
                       make_random_lasso, sparsity_level)
from .prox import NonsmoothSpec, prox_generic, prox_rank1
from .solvers import (MONOTONE_SOLVERS, get_solver,
                      solve_adaptive_monotone_fista, solve_adaptive_tseng,
                      solve_fbs)

__all__ = [
    "OracleResult",
    "random_quadratic",
    "grid_argmin_2d",
    "golden_argmin",
    "loglog_slope",
    "epg_equivalence_suite",
    "beta_star_suite",
    "metric_algebra_suite",
    "rank1_prox_suite",
    "monotonicity_suite",
    "rates_suite",
    "gradient_suite",
    "sparse_net_suite",
    "descent_lemma_suite",
    "SUITES",
]


@dataclass
class OracleResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.name}: {self.value:.3e} "
                f"(tol {self.tolerance:.1e}) {self.detail}".rstrip())


def random_quadratic(rng, n: int, eig_range=(0.3, 1.0), scale: float = 1.0):
    """Quadratic with random eigenvectors and eigenvalues in `eig_range`."""
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = scale * rng.uniform(*eig_range, n)
    return QuadraticProblem((V * w) @ V.T, rng.standard_normal(n))


def grid_argmin_2d(fun, lo, hi, resolution: float = 1e-4, points: int = 201):
    """Minimize a convex function of two variables by coarse-to-fine grids.

    Each level evaluates `fun` on a ``points x points`` grid, then zooms into
    a window of two cells around the best node, until the cell width is at
    most `resolution`. `fun` receives two broadcastable arrays.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    while True:
        g0 = np.linspace(lo[0], hi[0], points)
        g1 = np.linspace(lo[1], hi[1], points)
        vals = fun(g0[:, None], g1[None, :])
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        best = np.array([g0[i], g1[j]])
        h = (hi - lo) / (points - 1)
        if np.all(h <= resolution):
            return best
        lo, hi = best - 2 * h, best + 2 * h


def golden_argmin(fun, lo: float = -1e3, hi: float = 1e3, n_scan: int = 2001,
                  tol: float = 1e-8) -> float:
    """Coarse scan followed by golden-section refinement."""
    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([fun(b) for b in grid])
    i = int(np.clip(np.argmin(vals), 1, n_scan - 2))
    res = optimize.minimize_scalar(fun, bracket=(grid[i - 1], grid[i],
                                                 grid[i + 1]),
                                   method="golden", tol=tol)
    return float(res.x)


def loglog_slope(k, gap, kmin=50, kmax=2000, floor=1e-13):
    """Least-squares slope of ``log gap`` against ``log k`` on a window."""
    k = np.asarray(k, dtype=float)
    gap = np.asarray(gap, dtype=float)
    sel = (k >= kmin) & (k <= kmax) & (gap > floor)
    if sel.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(k[sel]), np.log(gap[sel]), 1)[0])


def _timed(name, tol, fn):
    t0 = time.perf_counter()
    value, passed, detail = fn()
    return OracleResult(name, bool(passed), float(value), tol, detail,
                        time.perf_counter() - t0)


def _epg_instance(rng, n, r, lam=0.1):
    f = random_quadratic(rng, n)
    prob = CompositeProblem(f, NonsmoothSpec("l1", lam))
    T = DiagonalMetric(f.l_max * rng.uniform(1.05, 1.5, n))
    return prob, T, rng.standard_normal(n), rng.standard_normal((n, r))


def epg_equivalence_suite(n_instances: int = 100, seed: int = 2024,
                   rounds: int = 200):
    """Closed-form EPG step vs alternating minimization."""

    def run():
        model_gap = iter_gap = 0.0
        for i in range(n_instances):
            rng = make_rng(seed, i)
            n = (5, 20, 30)[i % 3]
            r = (1, 2, 3)[(i // 3) % 3]
            prob, T, x, D = _epg_instance(rng, n, r)
            c = epg_step_closed_form(prob, T, D, x)
            a = epg_step_alternating(prob, T, D, x, rounds)
            model_gap = max(model_gap, abs(c.model_value - a.model_value))
            iter_gap = max(iter_gap, float(np.linalg.norm(c.x_next
                                                          - a.x_next)))
        return model_gap, iter_gap

    t0 = time.perf_counter()
    mg, ig = run()
    dt = time.perf_counter() - t0
    return [
        OracleResult("EPG model-value gap", mg <= 1e-7, mg, 1e-7,
                     f"{n_instances} instances", dt),
        OracleResult("EPG iterate gap", ig <= 1e-5, ig, 1e-5,
                     f"{n_instances} instances", dt),
        OracleResult("EPG runtime [s]", dt < 30.0, dt, 30.0),
    ]


def beta_star_suite(n_instances: int = 100, seed: int = 7):
    """Closed-form coefficient vs golden-section search of the beta model."""
    def run():
        worst = 0.0
        for i in range(n_instances):
            rng = make_rng(seed, i)
            n = int(rng.integers(2, 31))
            prob, T, x_base, D = _epg_instance(rng, n, 1)
            d = D[:, 0] / np.linalg.norm(D[:, 0])
            x = rng.standard_normal(n)
            f = prob.f

            def J(b):
                y = x_base + b * d
                fy, gy = f.value_grad(y)
                return model_value(prob, T, x, y, fy, gy)

            def M(v):
                return T.apply(v) - f.hessvec(x_base, v)

            b_closed = float(beta_star(d, M, x, x_base)[0])
            b_scan = golden_argmin(J)
            worst = max(worst, abs(b_closed - b_scan))
        return worst, worst <= 1e-6, f"{n_instances} instances"

    out = [_timed("beta* vs golden-section", 1e-6, run)]
    out.append(OracleResult("beta* runtime [s]", out[0].seconds < 10.0,
                            out[0].seconds, 10.0))
    return out


def metric_algebra_suite(n_cases: int = 1000, seed: int = 11):
    """Woodbury inverse and the span/kernel identities of the rank-R metric."""
    def run():
        inv = span = kern = kern_m = 0.0
        for i in range(n_cases):
            rng = make_rng(seed, i)
            n = int(rng.integers(2, 51))
            r = int(rng.integers(1, min(5, n - 1) + 1))
            f = random_quadratic(rng, n)
            T = DiagonalMetric(f.l_max * rng.uniform(1.05, 2.0, n))
            D = rng.standard_normal((n, r))
            Y = f.H @ D
            Q = build_q_rank_r(T, HessianOnSpan(D, Y))
            v = rng.standard_normal(n)
            inv = max(inv, np.linalg.norm(Q.apply(Q.solve(v)) - v)
                      / np.linalg.norm(v))
            QD = np.column_stack([Q.apply(D[:, j]) for j in range(r)])
            span = max(span, np.linalg.norm(QD - Y) / np.linalg.norm(Y))
            w = v - D @ np.linalg.lstsq(D, v, rcond=None)[0]
            kern = max(kern, np.linalg.norm(Q.apply(w) - T.apply(w))
                       / np.linalg.norm(T.apply(w)))
            MD = T.diag[:, None] * D - Y
            wm = v - MD @ np.linalg.lstsq(MD, v, rcond=None)[0]
            kern_m = max(kern_m, np.linalg.norm(Q.apply(wm) - T.apply(wm))
                         / np.linalg.norm(T.apply(wm)))
        return inv, span, kern, kern_m

    t0 = time.perf_counter()
    inv, span, kern, kern_m = run()
    dt = time.perf_counter() - t0
    return [
        OracleResult("metric Q Q^-1 v = v", inv <= 1e-10, inv, 1e-10,
                     f"{n_cases} cases", dt),
        OracleResult("metric Q D = H D", span <= 1e-10, span, 1e-10, "", dt),
        OracleResult("metric Q = T on ker D^T", kern <= 1e-10, kern, 1e-10,
                     "", dt),
        OracleResult("metric Q = T on ker ((T - H) D)^T", kern_m <= 1e-10,
                     kern_m, 1e-10, "", dt),
        OracleResult("metric runtime [s]", dt < 10.0, dt, 10.0),
    ]


def _rank1_instance(rng, n, lam=1.0):
    t = rng.uniform(1.0, 3.0, n)
    T = DiagonalMetric(t)
    u = rng.standard_normal(n)
    c = rng.uniform(0.1, 0.9)
    u *= math.sqrt(c / float(u @ (u / t)))
    Q = LowRankMetric(T, u.reshape(1, -1), sign=-1, damping=1.0)
    v = 2.0 * rng.standard_normal(n)
    return NonsmoothSpec("l1", lam), Q, v


def rank1_prox_suite(n_grid: int = 50, n_cross: int = 200, seed: int = 5):
    """Rank-1 prox: scalar root vs inner solver vs a 2-D grid oracle."""
    def grid_part():
        worst = 0.0
        for i in range(n_grid):
            rng = make_rng(seed, i)
            g, Q, v = _rank1_instance(rng, 2)
            t = Q.diag
            a = Q.scaled_factor[0]

            def obj(x0, x1):
                d0, d1 = x0 - v[0], x1 - v[1]
                quad = t[0] * d0 * d0 + t[1] * d1 * d1 - (a[0] * d0
                                                          + a[1] * d1) ** 2
                return g.weight * (np.abs(x0) + np.abs(x1)) + 0.5 * quad

            B = float(np.linalg.norm(v)) + 2.0
            xg = grid_argmin_2d(obj, (-B, -B), (B, B), 1e-4)
            xr = prox_rank1(g, Q, v)
            xi = prox_generic(g, Q, v)
            worst = max(worst, np.max(np.abs(xr - xg)),
                        np.max(np.abs(xi - xg)), np.max(np.abs(xr - xi)))
        return worst, worst <= 2e-4, f"{n_grid} N=2 instances"

    def cross_part():
        worst = 0.0
        for i in range(n_cross):
            rng = make_rng(seed + 1, i)
            n = int(rng.integers(2, 31))
            g, Q, v = _rank1_instance(rng, n, lam=float(rng.uniform(0.1, 2)))
            worst = max(worst, float(np.max(np.abs(
                prox_rank1(g, Q, v) - prox_generic(g, Q, v)))))
        return worst, worst <= 1e-8, f"{n_cross} instances N<=30"

    t0 = time.perf_counter()
    out = [_timed("rank-1 prox three-way (grid)", 2e-4, grid_part),
           _timed("rank-1 prox root vs inner solver", 1e-8, cross_part)]
    dt = time.perf_counter() - t0
    out.append(OracleResult("rank-1 prox runtime [s]", dt < 60.0, dt, 60.0))
    return out


def _monotone_violations(objectives, rel=1e-12):
    F = np.asarray(objectives)
    return int(np.sum(F[1:] > F[:-1] + rel * (1.0 + np.abs(F[:-1]))))


def monotonicity_suite(n_seeds: int = 10, iters: int = 2000):
    """Objective never increases for the monotone solvers."""
    def problems(seed):
        f, g = make_random_lasso(seed, 40, 60, lam=0.05)
        yield "lasso", CompositeProblem(f, g, name="lasso"), None
        fb, gb = make_random_lasso(seed + 1000, 30, 20, lam=0.02)
        yield ("box-lasso", CompositeProblem(
            fb, NonsmoothSpec("box", lo=-0.5, hi=0.5), name="box"), None)
        yield "simple_net", make_network_problem(seed), 5e-5

    def run():
        total = 0
        runs = 0
        bad = []
        for seed in range(n_seeds):
            for pname, prob, alpha in problems(seed):
                for sid in MONOTONE_SOLVERS:
                    if sid == "amfista" and not prob.convex:
                        continue
                    cfg = SolverConfig(max_iters=iters, step_alpha=alpha,
                                       seed=seed)
                    run_ = get_solver(sid)(prob, cfg)
                    v = _monotone_violations(run_.objectives)
                    runs += 1
                    if v:
                        bad.append(f"{sid}/{pname}/{seed}:{v}")
                    total += v
        detail = f"{runs} runs" + (f"; {', '.join(bad)}" if bad else "")
        return total, total == 0, detail

    return [_timed("monotone objective violations", 0.0, run)]


def rates_suite(n_instances: int = 10, iters: int = 2000,
                ref_iters: int = 100_000, seed: int = 3):
    """Rate certificates of the accelerated variants on convex lasso."""
    def run():
        worst_excess = -math.inf
        slopes = {"amfista": [], "atseng": []}
        for i in range(n_instances):
            f, g = make_random_lasso(seed + i, 100, 200, lam=0.05,
                                     condition=1e3)
            prob = CompositeProblem(f, g)
            ref = solve_fbs(prob, SolverConfig(max_iters=ref_iters,
                                               backtrack_lipschitz=False))
            x_star = ref.final_x
            f_star = prob.objective(x_star)
            cfg = SolverConfig(max_iters=iters, f_star=f_star, x_star=x_star)
            for sid, solver in (("amfista", solve_adaptive_monotone_fista),
                                ("atseng", solve_adaptive_tseng)):
                r = solver(prob, cfg)
                gap = r.objectives - f_star
                bound = np.asarray(r.info["rate_bound"])
                worst_excess = max(worst_excess, float(np.max(gap - bound)))
                k = np.arange(gap.size)
                slopes[sid].append(loglog_slope(k, gap))
        return worst_excess, slopes

    t0 = time.perf_counter()
    excess, slopes = run()
    dt = time.perf_counter() - t0
    out = [OracleResult("rate bound excess (max gap - bound)",
                        excess <= 1e-9, excess, 1e-9,
                        f"{n_instances} instances", dt)]
    for sid, s in slopes.items():
        worst = float(np.nanmax(s)) if not np.all(np.isnan(s)) else math.nan
        out.append(OracleResult(f"{sid} log-log slope (max over instances)",
                                bool(worst <= -1.5), worst, -1.5,
                                "k in [50, 2000]"))
    return out


def gradient_suite(seeds=range(5), n_coords: int = 20, h: float = 1e-6):
    """Network backpropagation vs central differences."""
    seeds = tuple(seeds)

    def run():
        worst = 0.0
        for seed in seeds:
            prob = make_network_problem(seed)
            rng = make_rng(seed, stream=7)
            x = prob.x0 + 0.1 * rng.standard_normal(prob.f.dim)
            coords = rng.choice(prob.f.dim, size=n_coords, replace=False)
            g = prob.f.grad(x)[coords]
            fd = finite_diff_gradient(prob.f.value, x, h, coords)[coords]
            worst = max(worst, float(np.linalg.norm(g - fd)
                                     / np.linalg.norm(fd)))
        return worst, worst <= 1e-5, f"{n_coords} coords x {len(seeds)} seeds"

    out = [_timed("network gradient relative error", 1e-5, run)]
    out.append(OracleResult("gradient runtime [s]", out[0].seconds < 5.0,
                            out[0].seconds, 5.0))
    return out


def sparse_net_suite(n_seeds: int = 10, iters: int = 2000,
                     alpha: float = 5e-5):
    """Desk-scale sparse network regression: sparsity and objective ranks."""
    t0 = time.perf_counter()
    sparsity, ratio_ok, fbs_ok = [], 0, 0
    for seed in range(n_seeds):
        prob = make_network_problem(seed)
        cfg = SolverConfig(max_iters=iters, step_alpha=alpha, seed=seed)
        a = get_solver("afista")(prob, cfg)
        m = get_solver("mfista")(prob, cfg)
        b = get_solver("fbs")(prob, cfg)
        sparsity.append(sparsity_level(a.final_x, prob.layout, 1e-10))
        if a.trace[-1].normalized_objective <= \
                1.05 * m.trace[-1].normalized_objective:
            ratio_ok += 1
        if a.trace[-1].objective <= b.trace[-1].objective:
            fbs_ok += 1
    dt = time.perf_counter() - t0
    med = float(np.median(sparsity))
    sp = ", ".join(f"{s:.2f}" for s in sparsity)
    return [
        OracleResult("net median aFISTA sparsity in [0.75, 0.95]",
                     0.75 <= med <= 0.95, med, 0.75, f"per seed: {sp}", dt),
        OracleResult("net aFISTA <= 1.05 x MFISTA (seeds of 10)",
                     ratio_ok >= 7, ratio_ok, 7),
        OracleResult("net aFISTA <= FBS (seeds of 10)", fbs_ok == n_seeds,
                     fbs_ok, n_seeds),
        OracleResult("net runtime [s]", dt < 300.0, dt, 300.0),
    ]


def descent_lemma_suite(n_pairs: int = 10_000, seed: int = 13):
    """Quadratic upper/lower bound with ``L = lambda_max(H)``."""
    def run():
        worst = -math.inf
        rng = make_rng(seed)
        probs = [random_quadratic(make_rng(seed, j), n, (0.01, 1.0),
                                  scale=float(10 ** j))
                 for j, n in enumerate((3, 10, 40))]
        for i in range(n_pairs):
            f = probs[i % len(probs)]
            x = rng.standard_normal(f.dim)
            xb = rng.standard_normal(f.dim)
            worst = max(worst, descent_lemma_gap(f, x, xb, f.l_max))
        return worst, worst <= 1e-10, f"{n_pairs} pairs"

    return [_timed("descent lemma worst gap", 1e-10, run)]


SUITES = {
    "epg": epg_equivalence_suite,
    "beta": beta_star_suite,
    "metric": metric_algebra_suite,
    "rank1prox": rank1_prox_suite,
    "monotone": monotonicity_suite,
    "rates": rates_suite,
    "gradient": gradient_suite,
    "sparse_net": sparse_net_suite,
    "descent": descent_lemma_suite,
}
