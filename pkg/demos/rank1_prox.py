"""Prox in an identity-minus-rank-1 metric through a scalar root.

The prox of the l1 norm in ``Q = T - u u^T`` reduces to a diagonal prox
whose input is shifted along ``T^{-1} u``; the shift solves a monotone scalar
equation. The result is compared with a generic accelerated inner solver and
with a 2-D grid search.
"""

# %%
import numpy as np

from afista.core import make_rng
from afista.metric import DiagonalMetric, LowRankMetric
from afista.oracles import grid_argmin_2d
from afista.prox import NonsmoothSpec, prox_diag, prox_generic, prox_rank1

g = NonsmoothSpec("l1", 1.0)
T = DiagonalMetric(np.array([2.0, 1.5]))
u = np.array([0.9, 0.6])
Q = LowRankMetric(T, u.reshape(1, -1), sign=-1)
v = np.array([1.7, -2.4])

x_root = prox_rank1(g, Q, v)
x_inner = prox_generic(g, Q, v)
print("scalar root   :", x_root)
print("inner solver  :", x_inner)
print("diagonal only :", prox_diag(g, T, v))

# %% grid oracle
Qd = Q.dense()


def objective(a, b):
    da, db = a - v[0], b - v[1]
    return (np.abs(a) + np.abs(b)
            + 0.5 * (Qd[0, 0] * da * da + 2 * Qd[0, 1] * da * db
                     + Qd[1, 1] * db * db))


x_grid = grid_argmin_2d(objective, [-5, -5], [5, 5], 1e-4)
print("grid search   :", x_grid)
print("max deviation :", np.max(np.abs(x_root - x_grid)))

# %% larger instance
rng = make_rng(1)
n = 30
t = rng.uniform(1, 3, n)
a = rng.standard_normal(n)
a *= np.sqrt(0.8 / (a @ (a / t)))
Q = LowRankMetric(DiagonalMetric(t), a.reshape(1, -1), sign=-1)
v = 2 * rng.standard_normal(n)
print("N=30 root vs inner:",
      np.max(np.abs(prox_rank1(g, Q, v) - prox_generic(g, Q, v))))
