import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from afista.core import make_rng
from afista.metric import DiagonalMetric, LowRankMetric
from afista.oracles import _rank1_instance, grid_argmin_2d
from afista.prox import (NonsmoothSpec, UnsupportedKindError, g_value,
                         prox_diag, prox_generic, prox_metric, prox_rank1,
                         subgradient_distance)

I2 = DiagonalMetric(np.ones(2))


def test_g_value_examples():
    assert g_value(NonsmoothSpec("l1", 1.0), [1.0, -2.0]) == 3.0
    assert g_value(NonsmoothSpec("nonneg"), [-1.0, 0.0]) == math.inf
    assert g_value(NonsmoothSpec("l0", 2.0), [0.0, 5.0, 0.0]) == 2.0
    assert g_value(NonsmoothSpec("zero"), [4.0]) == 0.0


def test_g_value_mask_and_box():
    g = NonsmoothSpec("l1", 1.0, mask=[True, False])
    assert g_value(g, [1.0, -5.0]) == 1.0
    box = NonsmoothSpec("box", lo=-1.0, hi=1.0)
    assert g_value(box, [0.5, -1.0]) == 0.0
    assert g_value(box, [1.5, 0.0]) == math.inf


def test_group_value():
    g = NonsmoothSpec("group_l12", 2.0, groups=([0, 1], [2]))
    assert g_value(g, [3.0, 4.0, -1.0]) == pytest.approx(12.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        NonsmoothSpec("bogus")
    with pytest.raises(ValueError):
        NonsmoothSpec("l1", -1.0)
    with pytest.raises(ValueError):
        NonsmoothSpec("box", lo=1.0, hi=0.0)
    with pytest.raises(ValueError):
        NonsmoothSpec("group_l12", 1.0, groups=([0, 1], [1]))
    assert not NonsmoothSpec("l0", 1.0).convex


def test_prox_diag_examples():
    np.testing.assert_array_equal(
        prox_diag(NonsmoothSpec("l1", 1.0), I2, [2.0, -0.5]), [1.0, 0.0])
    np.testing.assert_array_equal(
        prox_diag(NonsmoothSpec("nonneg"), I2, [-3.0, 4.0]), [0.0, 4.0])
    np.testing.assert_array_equal(
        prox_diag(NonsmoothSpec("l0", 1.0), I2, [2.0, 1.0]), [2.0, 0.0])


def test_prox_diag_scaled_threshold():
    T = DiagonalMetric(np.array([2.0, 0.5]))
    np.testing.assert_allclose(
        prox_diag(NonsmoothSpec("l1", 1.0), T, [1.0, 1.0]), [0.5, 0.0])


def test_prox_diag_mask_leaves_free_coordinates():
    g = NonsmoothSpec("l1", 10.0, mask=[True, False])
    np.testing.assert_array_equal(prox_diag(g, I2, [3.0, 3.0]), [0.0, 3.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1),
       st.sampled_from(["l1", "nonneg", "box", "l0", "group"]))
def test_prox_diag_minimizes_per_coordinate(seed, kind):
    rng = make_rng(seed)
    n = 4
    t = rng.uniform(0.5, 3.0, n)
    v = 2.0 * rng.standard_normal(n)
    if kind == "box":
        g = NonsmoothSpec("box", lo=-0.5, hi=0.7)
    elif kind == "group":
        g = NonsmoothSpec("group_l12", 0.8, groups=([0, 1, 2], [3]))
    else:
        g = NonsmoothSpec(kind, 0.8)
    x = prox_diag(g, DiagonalMetric(t), v)

    def obj(z):
        return g_value(g, z) + 0.5 * np.sum(t * (z - v) ** 2)

    best = obj(x)
    for _ in range(200):
        z = x + 0.05 * rng.standard_normal(n)
        if kind == "l0":
            z = np.where(rng.uniform(size=n) < 0.3, 0.0, z)
        assert best <= obj(z) + 1e-12


def test_group_prox_nonuniform_weights_vs_scipy():
    g = NonsmoothSpec("group_l12", 1.0, groups=([0, 1],))
    t = np.array([1.0, 3.0])
    v = np.array([2.0, -1.5])
    x = prox_diag(g, DiagonalMetric(t), v)
    ref = optimize.minimize(
        lambda z: np.linalg.norm(z) + 0.5 * np.sum(t * (z - v) ** 2),
        v, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14,
                                          "maxiter": 10_000}).x
    np.testing.assert_allclose(x, ref, atol=1e-6)


def test_prox_rank1_zero_factor_is_prox_diag():
    T = DiagonalMetric(np.array([2.0, 3.0]))
    Q = LowRankMetric(T, np.zeros((1, 2)))
    g = NonsmoothSpec("l1", 1.0)
    v = np.array([1.5, -0.2])
    np.testing.assert_array_equal(prox_rank1(g, Q, v), prox_diag(g, T, v))


def test_prox_rank1_zero_g_is_identity():
    Q = LowRankMetric(DiagonalMetric.scalar(2.0, 2), [[1.0, 0.0]])
    v = np.array([0.3, -4.0])
    np.testing.assert_array_equal(prox_rank1(NonsmoothSpec(), Q, v), v)


def test_prox_rank1_grid_example():
    # T = 2I, u = (1, 0): Q = diag(1, 2)
    Q = LowRankMetric(DiagonalMetric.scalar(2.0, 2), [[1.0, 0.0]])
    g = NonsmoothSpec("l1", 1.0)
    v = make_rng(4).standard_normal(2) * 3
    x = prox_rank1(g, Q, v)
    QD = Q.dense()

    def fun(a, b):
        da, db = a - v[0], b - v[1]
        return (np.abs(a) + np.abs(b)
                + 0.5 * (QD[0, 0] * da * da + 2 * QD[0, 1] * da * db
                         + QD[1, 1] * db * db))

    r = np.linalg.norm(v) + 2
    grid = grid_argmin_2d(fun, [-r, -r], [r, r], 1e-4)
    np.testing.assert_allclose(x, grid, atol=2e-4)
    # Q is diagonal here, so the answer is a soft threshold
    np.testing.assert_allclose(
        x, np.sign(v) * np.maximum(np.abs(v) - [1.0, 0.5], 0), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 30),
       st.sampled_from(["l1", "nonneg", "box"]))
def test_prox_rank1_vs_generic(seed, n, kind):
    rng = make_rng(seed)
    _, Q, v = _rank1_instance(rng, n)
    g = (NonsmoothSpec("box", lo=-0.3, hi=0.4) if kind == "box"
         else NonsmoothSpec(kind, 0.7))
    np.testing.assert_allclose(prox_rank1(g, Q, v), prox_generic(g, Q, v),
                               atol=1e-8)


def test_prox_rank1_rejects_l0():
    Q = LowRankMetric(DiagonalMetric.scalar(2.0, 2), [[1.0, 0.0]])
    with pytest.raises(UnsupportedKindError):
        prox_rank1(NonsmoothSpec("l0", 1.0), Q, [1.0, 1.0])
    with pytest.raises(UnsupportedKindError):
        prox_metric(NonsmoothSpec("l0", 1.0), Q, [1.0, 1.0])


def test_prox_generic_diagonal_exact():
    T = DiagonalMetric(np.array([1.0, 2.0, 4.0]))
    g = NonsmoothSpec("l1", 0.5)
    v = np.array([1.0, -0.1, 2.0])
    np.testing.assert_array_equal(prox_generic(g, T, v), prox_diag(g, T, v))


def test_prox_generic_zero_g():
    _, Q, v = _rank1_instance(make_rng(1), 8)
    np.testing.assert_allclose(prox_generic(NonsmoothSpec(), Q, v), v,
                               atol=1e-10)


def test_prox_generic_rank2_optimality():
    rng = make_rng(12)
    n = 10
    T = DiagonalMetric(rng.uniform(1.0, 2.0, n))
    U = 0.3 * rng.standard_normal((2, n))
    Q = LowRankMetric(T, U, sign=-1)
    g = NonsmoothSpec("l1", 0.5)
    v = rng.standard_normal(n)
    x, res, _ = prox_generic(g, Q, v, full_output=True)
    assert res <= 1e-12
    # -Q (x - v) lies in the subdifferential of g at x
    assert subgradient_distance(g, x, -Q.apply(x - v)) <= 1e-9


def test_prox_metric_dispatch_plus_sign():
    rng = make_rng(2)
    n = 6
    Q = LowRankMetric(DiagonalMetric.scalar(1.0, n),
                      rng.standard_normal((1, n)), sign=1)
    g = NonsmoothSpec("l1", 0.2)
    v = rng.standard_normal(n)
    x = prox_metric(g, Q, v)
    assert subgradient_distance(g, x, -Q.apply(x - v)) <= 1e-9


def test_subgradient_distance_l1():
    g = NonsmoothSpec("l1", 1.0)
    assert subgradient_distance(g, [1.0, 0.0], [1.0, 0.5]) == 0.0
    assert subgradient_distance(g, [1.0, 0.0], [0.0, 2.0]) == \
        pytest.approx(math.sqrt(2.0))
