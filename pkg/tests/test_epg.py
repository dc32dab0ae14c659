import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from afista.core import make_rng
from afista.epg import (backtrack_beta, backtrack_lipschitz, beta_star,
                        epg_step_alternating, epg_step_closed_form,
                        extrapolate, model_value, prox_grad_step)
from afista.metric import DiagonalMetric, HessianOnSpan, build_q_rank_r
from afista.oracles import _epg_instance, golden_argmin, random_quadratic
from afista.problems import CompositeProblem, QuadraticProblem
from afista.prox import NonsmoothSpec


def test_extrapolate_examples():
    np.testing.assert_array_equal(extrapolate([1.0, 2.0], [[1.0], [1.0]],
                                              [0.0]), [1.0, 2.0])
    np.testing.assert_array_equal(extrapolate([0.0, 0.0], [1.0, 1.0], [2.0]),
                                  [2.0, 2.0])


def test_extrapolate_shape_errors():
    with pytest.raises(ValueError):
        extrapolate([0.0, 0.0], [1.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        extrapolate([0.0, 0.0], [1.0, 1.0, 1.0], [1.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_extrapolate_stays_in_span(seed):
    rng = make_rng(seed)
    x = rng.standard_normal(8)
    D = rng.standard_normal((8, 3))
    y = extrapolate(x, D, rng.standard_normal(3))
    coef = np.linalg.lstsq(D, y - x, rcond=None)[0]
    assert np.linalg.norm(D @ coef - (y - x)) <= 1e-10


def small_problem(g=None):
    f = QuadraticProblem(np.diag([1.0, 3.0]), [0.5, -1.0], c=2.0)
    return CompositeProblem(f, g or NonsmoothSpec("l1", 0.3))


def test_model_value_at_linearization_point():
    p = small_problem()
    x = np.array([0.4, -0.7])
    T = DiagonalMetric.scalar(5.0, 2)
    assert model_value(p, T, x, x) == pytest.approx(p.objective(x))


def test_model_value_exact_for_quadratic_metric():
    p = small_problem(NonsmoothSpec())
    T = DiagonalMetric(np.array([1.0, 3.0]))
    rng = make_rng(0)
    for _ in range(10):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        assert model_value(p, T, x, y) == pytest.approx(p.f.value(x),
                                                        abs=1e-12)


def test_model_value_infeasible():
    p = small_problem(NonsmoothSpec("nonneg"))
    T = DiagonalMetric.scalar(5.0, 2)
    assert model_value(p, T, np.array([-1.0, 0.0]), np.zeros(2)) == math.inf


def test_beta_star_examples():
    D = np.array([[1.0], [0.0]])
    np.testing.assert_array_equal(beta_star(D, np.eye(2), [1.0, 1.0],
                                            [1.0, 1.0]), [0.0])
    np.testing.assert_allclose(beta_star(D, np.eye(2), [3.0, 4.0],
                                         [0.0, 0.0]), [3.0])


def test_beta_star_matches_scan():
    rng = make_rng(33)
    for _ in range(5):
        prob, T, xb, D = _epg_instance(rng, 12, 1)
        x = rng.standard_normal(12)
        M = T.dense() - prob.f.H
        b = beta_star(D, M, x, xb)[0]

        def phi(s):
            y = xb + s * D[:, 0]
            f_y, g_y = prob.f.value_grad(y)
            d = x - y
            return f_y + g_y @ d + 0.5 * d @ T.apply(d)

        assert b == pytest.approx(golden_argmin(phi), abs=1e-6)


def test_closed_form_without_directions_is_prox_step():
    prob, T, xb, _ = _epg_instance(make_rng(1), 10, 1)
    r = epg_step_closed_form(prob, T, None, xb)
    np.testing.assert_array_equal(
        r.x_next, prox_grad_step(prob, T, xb, prob.f.grad(xb)))
    assert r.beta.size == 0


def test_closed_form_smooth_identity_hessian():
    # g = 0, f = 0.5 ||x||^2, T = 2I
    f = QuadraticProblem(np.eye(3), np.zeros(3))
    prob = CompositeProblem(f, NonsmoothSpec())
    T = DiagonalMetric.scalar(2.0, 3)
    rng = make_rng(5)
    xb = rng.standard_normal(3)
    d = rng.standard_normal((3, 1))
    r = epg_step_closed_form(prob, T, d, xb)
    Q = build_q_rank_r(T, HessianOnSpan(d, d))
    np.testing.assert_allclose(r.x_next, xb - Q.solve(xb), atol=1e-12)
    alt = epg_step_alternating(prob, T, d, xb, n_rounds=200)
    # alternating stops on a 1e-12 model decrease, so iterates agree to ~1e-6
    assert alt.model_value == pytest.approx(r.model_value, abs=1e-10)
    np.testing.assert_allclose(r.x_next, alt.x_next, atol=1e-5)


def joint_model(prob, T, x, xb, D, beta):
    return model_value(prob, T, x, extrapolate(xb, D, beta))


def test_closed_form_dominates_grid():
    rng = make_rng(8)
    prob, T, xb, D = _epg_instance(rng, 20, 1)
    r = epg_step_closed_form(prob, T, D, xb)
    best = joint_model(prob, T, r.x_next, xb, D, r.beta)
    assert best == pytest.approx(r.model_value, abs=1e-12)
    for s in np.linspace(-1.0, 3.0, 41):
        x = xb + s * (r.x_next - xb)
        for b in r.beta[0] + np.linspace(-2.0, 2.0, 41):
            assert best <= joint_model(prob, T, x, xb, D, [b]) + 1e-12


def test_alternating_single_round_is_forward_backward():
    prob, T, xb, D = _epg_instance(make_rng(2), 10, 2)
    r = epg_step_alternating(prob, T, D, xb, n_rounds=1)
    np.testing.assert_array_equal(
        r.x_next, prox_grad_step(prob, T, xb, prob.f.grad(xb)))
    np.testing.assert_array_equal(r.beta, [0.0, 0.0])


@pytest.mark.parametrize("seed", range(5))
def test_alternating_converges_to_closed_form(seed):
    rng = make_rng(100 + seed)
    prob, T, xb, D = _epg_instance(rng, 20, 1)
    exact = epg_step_closed_form(prob, T, D, xb).model_value
    vals = [epg_step_alternating(prob, T, D, xb, n_rounds=r).model_value
            for r in range(1, 51)]
    assert np.all(np.diff(vals) <= 1e-12)
    assert min(vals) >= exact - 1e-10
    assert vals[-1] - exact <= 1e-8


def test_alternating_fixed_point():
    prob, T, xb, D = _epg_instance(make_rng(3), 20, 1)
    r = epg_step_closed_form(prob, T, D, xb)
    a = epg_step_alternating(prob, T, D, xb, n_rounds=1, beta0=r.beta)
    assert a.model_value == pytest.approx(r.model_value, abs=1e-12)


def test_backtrack_beta_zero_direction():
    prob, T, xb, _ = _epg_instance(make_rng(4), 6, 1)
    r = backtrack_beta(prob, T, np.zeros(6), xb, (2.0, 1.0, 0.0))
    assert r.beta[0] == 2.0
    assert r.n_beta_trials == 1
    np.testing.assert_array_equal(r.y, xb)


def test_backtrack_beta_requires_zero_sample():
    prob, T, xb, D = _epg_instance(make_rng(4), 6, 1)
    with pytest.raises(ValueError):
        backtrack_beta(prob, T, D[:, 0], xb, (2.0, 1.0))


def test_backtrack_beta_certificate_on_lasso_run():
    rng = make_rng(6)
    n = 30
    f = random_quadratic(rng, n, (0.01, 1.0))
    prob = CompositeProblem(f, NonsmoothSpec("l1", 0.1))
    T = DiagonalMetric.scalar(1.01 * f.l_max, n)
    x_prev = x = np.zeros(n)
    F = prob.objective(x)
    for _ in range(500):
        r = backtrack_beta(prob, T, x - x_prev, x, (2.0, 1.0, 0.0), F)
        assert r.model_value <= F
        F_new = prob.objective(r.x_next)
        assert F_new <= F + 1e-12 * (1 + abs(F))
        x_prev, x, F = x, r.x_next, F_new


def test_backtrack_lipschitz_examples():
    f = QuadraticProblem(np.array([[4.0]]), [0.0])
    ok, L = backtrack_lipschitz(f, np.zeros(1), np.ones(1), 1.0)
    assert not ok and L == 2.0
    ok, L = backtrack_lipschitz(f, np.zeros(1), np.ones(1), 4.0)
    assert ok and L == 4.0
    ok, _ = backtrack_lipschitz(f, np.ones(1), np.ones(1), 1e-3)
    assert ok


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_backtrack_lipschitz_accepts_above_lmax(seed):
    rng = make_rng(seed)
    f = random_quadratic(rng, 7, (0.01, 1.0), scale=10.0)
    ok, _ = backtrack_lipschitz(f, rng.standard_normal(7),
                                rng.standard_normal(7), f.l_max)
    assert ok
