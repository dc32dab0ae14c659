"""Problem instances: quadratic/lasso fixtures and the sparse network regression."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Block, BlockLayout, SmoothFunction, make_rng, unpack
from .prox import NonsmoothSpec, g_value

__all__ = [
    "CompositeProblem",
    "QuadraticProblem",
    "LeastSquaresProblem",
    "quad_value_grad",
    "make_random_lasso",
    "RegressionDataset",
    "target_function",
    "generate_data",
    "save_dataset_csv",
    "load_dataset_csv",
    "NetworkSpec",
    "NetworkProblem",
    "nn_forward",
    "nn_value_grad",
    "init_network_params",
    "make_network_problem",
    "sparsity_level",
]


@dataclass
class CompositeProblem:
    """``min f(x) + g(x)`` with a smooth `f` and nonsmooth `g`."""

    f: SmoothFunction
    g: NonsmoothSpec
    x0: np.ndarray | None = None
    name: str = ""
    layout: BlockLayout | None = None

    def objective(self, x) -> float:
        gv = g_value(self.g, x)
        if math.isinf(gv):
            return math.inf
        return self.f.value(x) + gv

    @property
    def convex(self) -> bool:
        return bool(self.f.convex and self.g.convex)


class QuadraticProblem(SmoothFunction):
    """``f(x) = 0.5 x^T H x + b^T x + c`` with dense symmetric ``H``."""

    is_quadratic = True

    def __init__(self, H, b, c: float = 0.0):
        H = np.asarray(H, dtype=np.float64)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("H must be square")
        self.H = 0.5 * (H + H.T)
        self.b = np.asarray(b, dtype=np.float64).reshape(-1)
        if self.b.size != self.H.shape[0]:
            raise ValueError("b has the wrong length")
        self.c = float(c)
        w = np.linalg.eigvalsh(self.H)
        self.l_min = float(w[0])
        self.l_max = float(w[-1])
        self.lipschitz = max(abs(w[0]), abs(w[-1]))
        self.convex = bool(w[0] >= -1e-12 * max(1.0, abs(w[-1])))

    @property
    def dim(self) -> int:
        return self.b.size

    def value(self, x) -> float:
        return float(0.5 * x @ (self.H @ x) + self.b @ x + self.c)

    def grad(self, x):
        return self.H @ x + self.b

    def hessvec(self, x, v):
        return self.H @ v


class LeastSquaresProblem(QuadraticProblem):
    """``f(x) = 0.5 ||A x - y||^2`` evaluated from the residual."""

    def __init__(self, A, y):
        self.A = np.asarray(A, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64).reshape(-1)
        super().__init__(self.A.T @ self.A, -(self.A.T @ self.y),
                         0.5 * float(self.y @ self.y))

    def value(self, x) -> float:
        r = self.A @ x - self.y
        return 0.5 * float(r @ r)

    def grad(self, x):
        return self.A.T @ (self.A @ x - self.y)


def quad_value_grad(p: QuadraticProblem, x):
    x = np.asarray(x, dtype=np.float64)
    if x.size != p.dim:
        raise ValueError("dimension mismatch")
    return p.value(x), p.grad(x)


def make_random_lasso(seed: int, n: int, m: int, density: float = 0.1,
                      lam: float = 0.1, condition: float | None = None,
                      noise: float = 0.01):
    """Seeded lasso ``0.5 ||A x - y||^2 + lam ||x||_1``.

    `A` is Gaussian ``m x n`` scaled by ``1/sqrt(m)``; with `condition` set
    (requires ``m >= n``) its singular values are replaced by a geometric
    ladder so that ``cond(A^T A) == condition``. ``y = A x_true + noise``
    with a planted sparse ``x_true``.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    rng = make_rng(seed)
    A = rng.standard_normal((m, n)) / math.sqrt(m)
    if condition is not None:
        if m < n:
            raise ValueError("a prescribed condition number needs m >= n")
        U, _, Vt = np.linalg.svd(A, full_matrices=False)
        s = np.geomspace(1.0, 1.0 / math.sqrt(condition), n)
        A = (U * s) @ Vt
    x_true = np.zeros(n)
    k = max(1, int(round(density * n)))
    idx = rng.choice(n, size=k, replace=False)
    x_true[idx] = rng.standard_normal(k)
    y = A @ x_true + noise * rng.standard_normal(m)
    return LeastSquaresProblem(A, y), NonsmoothSpec("l1", lam)


def target_function(x):
    return x ** 3 + np.cos(5 * x)


@dataclass
class RegressionDataset:
    X: np.ndarray
    Y_tilde: np.ndarray
    outlier_idx: np.ndarray
    noise_sigma: float = 1.5

    @property
    def n_samples(self) -> int:
        return self.X.shape[-1]

    @property
    def outlier_mask(self) -> np.ndarray:
        m = np.zeros(self.n_samples, dtype=bool)
        m[self.outlier_idx] = True
        return m


def generate_data(seed: int, n_samples: int = 80, sigma: float = 1.5,
                  n_outliers: int = 20,
                  outlier_scale: tuple[float, float] = (4.0, 8.0)
                  ) -> RegressionDataset:
    """Noisy samples of ``x^3 + cos(5x)`` on an equispaced grid over [-3, 3].

    Noise is ``sigma`` times a standard normal draw; `n_outliers` indices
    (uniform, without replacement) have their draw multiplied by a factor
    from ``Uniform(outlier_scale)``.
    """
    rng = make_rng(seed)
    X = np.linspace(-3.0, 3.0, n_samples).reshape(1, -1)
    E = sigma * rng.standard_normal(n_samples)
    idx = np.sort(rng.choice(n_samples, size=n_outliers, replace=False))
    E[idx] *= rng.uniform(*outlier_scale, size=n_outliers)
    Y = target_function(X) + E.reshape(1, -1)
    return RegressionDataset(X, Y, idx, sigma)


def save_dataset_csv(data: RegressionDataset, path) -> None:
    mask = data.outlier_mask
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "is_outlier"])
        for xi, yi, oi in zip(data.X.ravel(), data.Y_tilde.ravel(), mask):
            w.writerow([repr(float(xi)), repr(float(yi)), int(oi)])


def load_dataset_csv(path, noise_sigma: float = 1.5) -> RegressionDataset:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or set(rows[0]) != {"x", "y", "is_outlier"}:
        raise ValueError(f"{path}: expected columns x,y,is_outlier")
    X = np.array([float(r["x"]) for r in rows]).reshape(1, -1)
    Y = np.array([float(r["y"]) for r in rows]).reshape(1, -1)
    idx = np.array([i for i, r in enumerate(rows) if int(r["is_outlier"])],
                   dtype=np.intp)
    return RegressionDataset(X, Y, idx, noise_sigma)


@dataclass(frozen=True)
class NetworkSpec:
    """Two-hidden-layer network with smoothed absolute-value activations."""

    dims: tuple[int, int, int, int] = (1, 10, 10, 1)
    eps: float = 0.1
    lam: float = 1.0
    layout: BlockLayout = field(init=False)

    def __post_init__(self):
        blocks = []
        for j in range(3):
            blocks.append(Block(f"W{j}", self.dims[j + 1], self.dims[j], True))
            blocks.append(Block(f"b{j}", self.dims[j + 1], 1, False))
        object.__setattr__(self, "layout", BlockLayout(tuple(blocks)))

    def activation(self, a):
        return np.sqrt(a * a + self.eps ** 2)


def _forward(params, spec: NetworkSpec, X):
    W0, b0, W1, b1, W2, b2 = unpack(params, spec.layout)
    A0 = W0 @ X + b0
    H1 = spec.activation(A0)
    A1 = W1 @ H1 + b1
    H2 = spec.activation(A1)
    out = W2 @ H2 + b2
    return (W0, W1, W2), (A0, H1, A1, H2), out


def nn_forward(params, spec: NetworkSpec, X) -> np.ndarray:
    """Network output ``W2 s(W1 s(W0 X + B0) + B1) + B2`` of shape (1, N)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return _forward(params, spec, X)[2]


def nn_value_grad(params, spec: NetworkSpec, data: RegressionDataset):
    """Smoothed-l1 data loss and its gradient by reverse-mode differentiation."""
    (W0, W1, W2), (A0, H1, A1, H2), out = _forward(params, spec, data.X)
    r = out - data.Y_tilde
    s = np.sqrt(r * r + spec.eps ** 2)
    value = float(np.sum(s))
    d_out = r / s
    gW2 = d_out @ H2.T
    gb2 = d_out.sum(axis=1, keepdims=True)
    d_A1 = (W2.T @ d_out) * (A1 / H2)
    gW1 = d_A1 @ H1.T
    gb1 = d_A1.sum(axis=1, keepdims=True)
    d_A0 = (W1.T @ d_A1) * (A0 / H1)
    gW0 = d_A0 @ data.X.T
    gb0 = d_A0.sum(axis=1, keepdims=True)
    grad = np.concatenate([a.ravel() for a in (gW0, gb0, gW1, gb1, gW2, gb2)])
    return value, grad


class NetworkProblem(SmoothFunction):
    """Smooth data term of the sparse network regression."""

    def __init__(self, spec: NetworkSpec, data: RegressionDataset):
        self.spec = spec
        self.data = data
        self._key = None
        self._cache = None

    @property
    def dim(self) -> int:
        return self.spec.layout.size

    def value_grad(self, x):
        key = np.asarray(x, dtype=np.float64).tobytes()
        if key != self._key:
            self._cache = nn_value_grad(x, self.spec, self.data)
            self._key = key
        v, g = self._cache
        return v, g.copy()

    def value(self, x) -> float:
        return self.value_grad(x)[0]

    def grad(self, x):
        return self.value_grad(x)[1]


def init_network_params(spec: NetworkSpec, seed: int,
                        std: float = 0.5) -> np.ndarray:
    """Gaussian weights with standard deviation `std`, zero biases."""
    rng = make_rng(seed, stream=1)
    mask = spec.layout.regularized_mask()
    x = np.zeros(spec.layout.size)
    x[mask] = std * rng.standard_normal(int(mask.sum()))
    return x


def make_network_problem(seed: int, spec: NetworkSpec | None = None,
                         init_std: float = 0.5,
                         data: RegressionDataset | None = None
                         ) -> CompositeProblem:
    """The sparse network regression with l1 on the weight blocks only."""
    spec = spec or NetworkSpec()
    data = data if data is not None else generate_data(seed)
    g = NonsmoothSpec("l1", spec.lam, mask=spec.layout.regularized_mask())
    return CompositeProblem(NetworkProblem(spec, data), g,
                            x0=init_network_params(spec, seed, init_std),
                            name="simple_net", layout=spec.layout)


def sparsity_level(x, layout: BlockLayout, tol: float = 0.0) -> float:
    """Fraction of regularized coordinates with ``|x_i| <= tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    mask = layout.regularized_mask()
    if not mask.any():
        return 1.0
    return float(np.mean(np.abs(np.asarray(x)[mask]) <= tol))
