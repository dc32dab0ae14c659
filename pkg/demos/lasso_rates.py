"""Convergence of the solvers on an ill-conditioned lasso problem.

Runs every solver for a fixed budget, then checks the objective gap of the
two accelerated convex variants against their rate bound.
"""

# %%
import numpy as np

from afista.core import SolverConfig
from afista.oracles import loglog_slope
from afista.problems import CompositeProblem, make_random_lasso
from afista.solvers import SOLVERS, solve_fbs

f, g = make_random_lasso(seed=3, n=100, m=200, lam=0.05, condition=1e3)
problem = CompositeProblem(f, g)

ref = solve_fbs(problem, SolverConfig(max_iters=100_000,
                                      backtrack_lipschitz=False))
x_star = ref.final_x
f_star = problem.objective(x_star)
print(f"reference objective {f_star:.12f}")

# %% all solvers, 2000 iterations
cfg = SolverConfig(max_iters=2000, f_star=f_star, x_star=x_star)
runs = {sid: solver(problem, cfg) for sid, solver in SOLVERS.items()}
print(f"{'solver':8s} {'gap@20':>10s} {'final gap':>10s} {'iters':>6s} status")
for sid, run in runs.items():
    gap = run.objectives - f_star
    k = min(20, gap.size - 1)
    print(f"{sid:8s} {gap[k]:10.2e} {gap[-1]:10.2e} {gap.size - 1:6d} "
          f"{run.status}")

# %% rate certificates
for sid in ("amfista", "atseng"):
    run = runs[sid]
    gap = run.objectives - f_star
    bound = np.asarray(run.info["rate_bound"])
    k = np.arange(gap.size)
    print(f"{sid}: max(gap - bound) = {np.max(gap - bound):.2e}, "
          f"log-log slope on [50, 2000] = {loglog_slope(k, gap):.2f}")
