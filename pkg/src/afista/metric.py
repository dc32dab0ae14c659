"""Quadratic-form metrics: diagonal bases with signed low-rank corrections.

A :class:`LowRankMetric` represents ``Q = T + sign * rho * U^T U`` with a
positive diagonal ``T`` and an ``R x N`` factor ``U``. Everything that needs
``Q^{-1}`` or a positive-definiteness certificate works with ``R x R`` dense
matrices only (Sherman-Morrison-Woodbury).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg as sla

__all__ = [
    "MetricError",
    "MetricConstructionError",
    "DiagonalMetric",
    "LowRankMetric",
    "HessianOnSpan",
    "metric_inner",
    "build_q_rank_r",
    "apply_q_inverse",
    "sr1_memory_metric",
    "is_positive_definite",
    "as_operator",
    "PD_TOL",
    "DEPENDENCE_TOL",
    "SR1_EPS",
]

PD_TOL = 1e-12
DEPENDENCE_TOL = 1e-12
SR1_EPS = 1e-8


class MetricError(ValueError):
    """Numerical failure when applying or inverting a metric."""


class MetricConstructionError(MetricError):
    """The requested metric is not well defined (singular or indefinite)."""


@dataclass(frozen=True, eq=False)
class DiagonalMetric:
    diag: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=np.float64).reshape(-1)
        if not np.all(d > 0) or not np.all(np.isfinite(d)):
            raise MetricConstructionError(
                "diagonal metric entries must be finite and positive")
        d.flags.writeable = False
        object.__setattr__(self, "diag", d)

    @classmethod
    def scalar(cls, t: float, n: int) -> "DiagonalMetric":
        return cls(np.full(n, float(t)))

    @property
    def dim(self) -> int:
        return self.diag.size

    @property
    def base(self) -> "DiagonalMetric":
        return self

    @property
    def rank(self) -> int:
        return 0

    def apply(self, v):
        return self.diag * v

    def solve(self, v):
        return v / self.diag

    def dense(self) -> np.ndarray:
        return np.diag(self.diag)


@dataclass(frozen=True, eq=False)
class LowRankMetric:
    """``Q = base + sign * damping * U^T U`` with ``U`` of shape ``(R, N)``."""

    base: DiagonalMetric
    U: np.ndarray
    sign: int = -1
    damping: float = 1.0

    def __post_init__(self):
        U = np.array(self.U, dtype=np.float64)
        if U.ndim == 1:
            U = U.reshape(1, -1)
        if U.ndim != 2 or U.shape[1] != self.base.dim:
            raise MetricError(
                f"factor of shape {U.shape} incompatible with dimension "
                f"{self.base.dim}")
        if self.sign not in (-1, 1):
            raise MetricError("sign must be +1 or -1")
        if not 0.0 <= self.damping <= 1.0:
            raise MetricError("damping must lie in [0, 1]")
        U.flags.writeable = False
        object.__setattr__(self, "U", U)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def rank(self) -> int:
        return self.U.shape[0]

    @property
    def diag(self) -> np.ndarray:
        return self.base.diag

    @cached_property
    def scaled_factor(self) -> np.ndarray:
        """``V = sqrt(damping) U`` so that ``Q = T + sign V^T V``."""
        return np.sqrt(self.damping) * self.U

    @cached_property
    def capacitance(self) -> np.ndarray:
        """The ``R x R`` matrix ``I + sign V T^{-1} V^T``."""
        V = self.scaled_factor
        C = np.eye(self.rank) + self.sign * (V / self.base.diag) @ V.T
        return 0.5 * (C + C.T)

    @cached_property
    def _cap_factor(self):
        try:
            return sla.cho_factor(self.capacitance, lower=True)
        except np.linalg.LinAlgError as exc:
            raise MetricError("metric is not positive definite") from exc

    def apply(self, v):
        V = self.scaled_factor
        return self.base.apply(v) + self.sign * (V.T @ (V @ v))

    def solve(self, v):
        if self.rank == 0:
            return self.base.solve(v)
        V = self.scaled_factor
        w = self.base.solve(v)
        corr = sla.cho_solve(self._cap_factor, V @ w)
        return w - self.sign * self.base.solve(V.T @ corr)

    def dense(self) -> np.ndarray:
        V = self.scaled_factor
        return self.base.dense() + self.sign * V.T @ V


@dataclass(frozen=True, eq=False)
class HessianOnSpan:
    """Extrapolation directions ``D`` (columns) and ``Y = H D``."""

    D: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        D = np.array(self.D, dtype=np.float64)
        Y = np.array(self.Y, dtype=np.float64)
        if D.ndim == 1:
            D = D.reshape(-1, 1)
        if Y.ndim == 1:
            Y = Y.reshape(-1, 1)
        if D.shape != Y.shape:
            raise MetricConstructionError(
                f"D {D.shape} and Y {Y.shape} must have the same shape")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "Y", Y)

    @property
    def rank(self) -> int:
        return self.D.shape[1]

    def independent(self, tol: float = DEPENDENCE_TOL) -> bool:
        if self.rank == 0:
            return True
        norms = np.linalg.norm(self.D, axis=0)
        if np.any(norms == 0):
            return False
        Dn = self.D / norms
        return bool(np.linalg.det(Dn.T @ Dn) >= tol)


def as_operator(M):
    """Return ``v -> M v`` for a metric object, dense matrix or callable."""
    if callable(M):
        return M
    if hasattr(M, "apply"):
        return M.apply
    M = np.asarray(M, dtype=np.float64)
    return lambda v: M @ v


def metric_inner(M, a, b) -> float:
    """``a^T M b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or (hasattr(M, "dim") and M.dim != a.size):
        raise MetricError("dimension mismatch")
    return float(a @ as_operator(M)(b))


def build_q_rank_r(T: DiagonalMetric, span: HessianOnSpan) -> LowRankMetric:
    """Metric equal to ``H`` on ``span(D)`` and to ``T`` on ``ker(D^T)``.

    ``Q = T - (TD - Y) [D^T (TD - Y)]^{-1} (TD - Y)^T`` is returned in the
    factored form ``T - U^T U`` with ``U = C^{-1} (TD - Y)^T`` where
    ``C C^T`` is the Cholesky factorization of the ``R x R`` Gram matrix.

    Raises
    ------
    MetricConstructionError
        If the columns of ``D`` are dependent, ``D^T (TD - Y)`` is not
        positive definite, or the resulting ``Q`` is not positive definite.
    """
    n = T.dim
    if span.D.shape[0] != n:
        raise MetricConstructionError("direction length does not match T")
    if span.rank == 0:
        return LowRankMetric(T, np.zeros((0, n)))
    if not span.independent():
        raise MetricConstructionError("extrapolation directions are dependent")
    MD = T.diag[:, None] * span.D - span.Y
    G = span.D.T @ MD
    G = 0.5 * (G + G.T)
    try:
        C = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise MetricConstructionError(
            "D^T (T D - Y) is not positive definite") from exc
    if np.min(np.diag(C)) ** 2 <= PD_TOL * max(1.0, np.max(np.abs(G))):
        raise MetricConstructionError("D^T (T D - Y) is numerically singular")
    U = sla.solve_triangular(C, MD.T, lower=True)
    Q = LowRankMetric(T, U, sign=-1, damping=1.0)
    if not is_positive_definite(Q):
        raise MetricConstructionError("constructed metric is not positive "
                                      "definite")
    return Q


def apply_q_inverse(Q, v) -> np.ndarray:
    """``Q^{-1} v`` through diagonal solves and one ``R x R`` Cholesky solve."""
    v = np.asarray(v, dtype=np.float64)
    if v.size != Q.dim:
        raise MetricError("dimension mismatch")
    return Q.solve(v)


def is_positive_definite(Q, tol: float = PD_TOL) -> bool:
    """Certify ``Q`` at the ``R x R`` level.

    For a minus-sign correction ``Q`` is positive definite iff
    ``I - rho U T^{-1} U^T`` is; that is tested with a Cholesky factorization
    whose pivots must exceed `tol`. Diagonal and plus-sign metrics are
    positive definite by construction.
    """
    if isinstance(Q, DiagonalMetric) or Q.rank == 0 or Q.sign == 1:
        return True
    try:
        C = np.linalg.cholesky(Q.capacitance)
    except np.linalg.LinAlgError:
        return False
    return bool(np.min(np.diag(C)) ** 2 > tol)


def sr1_memory_metric(T: DiagonalMetric, d, y, rho: float = 1.0,
                      eps: float = SR1_EPS):
    """Zero-memory SR1 metric ``T + r r^T / <d, r>`` with ``r = y - T d``.

    Returned as a minus-sign :class:`LowRankMetric` with damping `rho` when
    ``<d, r> < -eps ||d|| ||r||`` and the damped metric is certified positive
    definite; otherwise `T` itself is returned.
    """
    d = np.asarray(d, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r = y - T.apply(d)
    s = float(d @ r)
    nr = np.linalg.norm(r)
    if nr == 0 or not s < -eps * np.linalg.norm(d) * nr:
        return T
    Q = LowRankMetric(T, (r / np.sqrt(-s)).reshape(1, -1), sign=-1,
                      damping=rho)
    if not is_positive_definite(Q):
        return T
    return Q
