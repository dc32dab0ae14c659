"""Shared numeric vocabulary: parameter vectors, block layouts, configuration,
trace records, seeded randomness and small test oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "LayoutError",
    "param_vector",
    "Block",
    "BlockLayout",
    "pack",
    "unpack",
    "make_rng",
    "SolverConfig",
    "TraceRecord",
    "SmoothFunction",
    "finite_diff_gradient",
    "descent_lemma_gap",
    "metric_lipschitz_ratios",
]


class LayoutError(ValueError):
    """Raised when arrays do not conform to a :class:`BlockLayout`."""


def param_vector(values) -> np.ndarray:
    """Return a read-only float64 copy of `values` after checking finiteness.

    Parameter vectors are plain 1-D numpy arrays; this constructor only
    enforces the invariants (1-D, finite entries, fixed length).
    """
    v = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("parameter vectors must have finite entries")
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class Block:
    name: str
    rows: int
    cols: int = 1
    regularized: bool = False

    @property
    def size(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class BlockLayout:
    """Ordered list of named matrix blocks packed row-major into one vector."""

    blocks: tuple[Block, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        names = [b.name for b in self.blocks]
        if len(set(names)) != len(names):
            raise LayoutError("block names must be unique")
        for b in self.blocks:
            if b.rows < 0 or b.cols < 0:
                raise LayoutError(f"negative shape for block {b.name!r}")

    @property
    def size(self) -> int:
        return sum(b.size for b in self.blocks)

    def offsets(self) -> list[tuple[int, int]]:
        out, start = [], 0
        for b in self.blocks:
            out.append((start, start + b.size))
            start += b.size
        return out

    def slice_of(self, name: str) -> slice:
        for b, (lo, hi) in zip(self.blocks, self.offsets()):
            if b.name == name:
                return slice(lo, hi)
        raise KeyError(name)

    def regularized_mask(self) -> np.ndarray:
        """Boolean mask over packed coordinates, True on regularized blocks."""
        mask = np.zeros(self.size, dtype=bool)
        for b, (lo, hi) in zip(self.blocks, self.offsets()):
            mask[lo:hi] = b.regularized
        return mask


def pack(arrays: Sequence, layout: BlockLayout) -> np.ndarray:
    """Concatenate `arrays` in layout order, each flattened row-major."""
    if len(arrays) != len(layout.blocks):
        raise LayoutError(
            f"expected {len(layout.blocks)} blocks, got {len(arrays)}")
    parts = []
    for a, b in zip(arrays, layout.blocks):
        a = np.asarray(a, dtype=np.float64)
        if a.size != b.size or (a.ndim == 2 and a.shape != (b.rows, b.cols)):
            raise LayoutError(
                f"block {b.name!r}: shape {a.shape} does not match "
                f"({b.rows}, {b.cols})")
        parts.append(a.reshape(-1))
    if not parts:
        return np.zeros(0)
    return np.concatenate(parts)


def unpack(v, layout: BlockLayout) -> list[np.ndarray]:
    """Split `v` into (rows, cols) matrices following `layout`."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size != layout.size:
        raise LayoutError(
            f"vector of length {v.size} does not match layout size "
            f"{layout.size}")
    return [v[lo:hi].reshape(b.rows, b.cols).copy()
            for b, (lo, hi) in zip(layout.blocks, layout.offsets())]


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic PCG64 generator for a 64-bit `seed`.

    Distinct `stream` values give statistically independent generators for
    the same seed (e.g. data noise vs. parameter initialization).
    """
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(stream)])
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class SolverConfig:
    """Options shared by all solvers.

    ``step_alpha`` is the step size; the base metric is ``T = I / step_alpha``.
    When it is ``None`` the solver uses ``1 / f.lipschitz``.
    """

    max_iters: int = 1000
    time_budget: float = math.inf
    step_alpha: float | None = None
    tol_residual: float = 0.0
    a_margin: float = 1e-6
    rho: float = 0.5
    beta_samples: tuple[float, ...] = (2.0, 1.0, 0.0)
    seed: int = 0
    backtrack_lipschitz: bool = True
    lipschitz_growth: float = 2.0
    lipschitz_decrease: bool = False
    inertia: float = 0.95
    rank: int = 1
    afista_mode: str = "auto"
    alternating_rounds: int = 50
    theta0: float = 1.0
    f_star: float | None = None
    x_star: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.step_alpha is not None and not self.step_alpha > 0:
            raise ValueError("step_alpha must be positive")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if not self.a_margin > 0:
            raise ValueError("a_margin must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.tol_residual < 0:
            raise ValueError("tol_residual must be non-negative")
        if not self.lipschitz_growth > 1:
            raise ValueError("lipschitz_growth must exceed 1")
        if not 0.0 <= self.inertia < 1.0:
            raise ValueError("inertia must lie in [0, 1)")
        if self.rank < 1:
            raise ValueError("rank must be at least 1")
        if not 0.0 < self.theta0 <= 1.0:
            raise ValueError("theta0 must lie in (0, 1]")
        if self.afista_mode not in ("auto", "closed_form", "backtracked",
                                    "alternating"):
            raise ValueError(f"unknown afista_mode {self.afista_mode!r}")
        self.beta_samples = tuple(float(b) for b in self.beta_samples)


@dataclass
class TraceRecord:
    iter: int
    wall_time: float
    objective: float
    normalized_objective: float
    stationarity_residual: float
    l_value: float
    n_backtracks: int
    beta_used: tuple[float, ...] = ()


class SmoothFunction:
    """Smooth part ``f`` of a composite objective.

    Subclasses implement :meth:`value` and :meth:`grad`; :meth:`hessvec`
    falls back to central differences of the gradient.
    """

    is_quadratic = False
    convex = False
    lipschitz: float | None = None

    def value(self, x) -> float:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def value_grad(self, x):
        return self.value(x), self.grad(x)

    def hessvec(self, x, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        nv = np.linalg.norm(v)
        if nv == 0:
            return np.zeros_like(v)
        h = 1e-6 * (1.0 + np.linalg.norm(x, np.inf)) / nv
        return (self.grad(x + h * v) - self.grad(x - h * v)) / (2 * h)

    @property
    def dim(self) -> int:
        raise NotImplementedError


def finite_diff_gradient(f: Callable[[np.ndarray], float], x, h: float,
                         coords: Sequence[int] | None = None) -> np.ndarray:
    """Central-difference gradient of `f` at `x`.

    Only the coordinates in `coords` are differentiated (all by default);
    the others are returned as zero.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    idx = range(x.size) if coords is None else coords
    for i in idx:
        xi = x[i]
        x[i] = xi + h
        fp = f(x)
        x[i] = xi - h
        fm = f(x)
        x[i] = xi
        g[i] = (fp - fm) / (2 * h)
    return g


def descent_lemma_gap(f, x, xbar, lipschitz: float, metric_diag=None) -> float:
    """``|f(x) - f(xbar) - <grad f(xbar), x - xbar>| - (L/2)||x - xbar||_V^2``.

    Non-positive whenever the gradient of `f` is `lipschitz`-Lipschitz in the
    metric ``V = diag(metric_diag)`` (identity by default).
    """
    x = np.asarray(x, dtype=np.float64)
    xbar = np.asarray(xbar, dtype=np.float64)
    d = x - xbar
    v = np.ones_like(d) if metric_diag is None else np.asarray(metric_diag)
    lhs = abs(f.value(x) - f.value(xbar) - f.grad(xbar) @ d)
    return lhs - 0.5 * lipschitz * float(d @ (v * d))


def metric_lipschitz_ratios(grad, V, x, y) -> tuple[float, float]:
    """Lipschitz ratios of a gradient under the two equivalent definitions.

    Returns ``(r1, r2)`` where ``r1 = ||grad h(x') - grad h(y')|| / ||x' - y'||``
    for ``h = f o V^{-1/2}`` with ``x' = V^{1/2} x``, and
    ``r2 = ||grad f(x) - grad f(y)||_{V^{-1}} / ||x - y||_V``. The two agree
    for any symmetric positive definite `V`.
    """
    V = np.asarray(V, dtype=np.float64)
    w, E = np.linalg.eigh(V)
    v_half = (E * np.sqrt(w)) @ E.T
    v_mhalf = (E / np.sqrt(w)) @ E.T
    xs, ys = v_half @ x, v_half @ y
    gh = v_mhalf @ (grad(v_mhalf @ xs) - grad(v_mhalf @ ys))
    r1 = np.linalg.norm(gh) / np.linalg.norm(xs - ys)
    dg = grad(x) - grad(y)
    dx = x - y
    r2 = math.sqrt(dg @ np.linalg.solve(V, dg)) / math.sqrt(dx @ V @ dx)
    return float(r1), float(r2)
