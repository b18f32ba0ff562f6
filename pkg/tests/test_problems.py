import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adacd.datasets import DATAPOINTS, FEATURES, DataError, Dataset
from adacd.linalg import SparseColumnMatrix
from adacd.problems import (HingeSVM, Lasso, compute_support_radius,
                            lasso_lambda_max, make_problem, soft_threshold)

from conftest import random_lasso, random_svm


# -- independent dense oracles -------------------------------------------

def lasso_objectives(a, y, lam, B, alpha):
    """Dense evaluation of both objectives straight from their definitions."""
    r = a @ alpha - y
    oa = r @ r + lam * np.abs(alpha).sum()
    w = 2 * r
    c = a.T @ w
    ob = w @ y + w @ w / 4 + B * np.maximum(np.abs(c) - lam, 0).sum()
    return oa, ob


def svm_objectives(a, y, lam, alpha):
    n = a.shape[1]
    w = a @ alpha / (lam * n)
    oa = -(alpha @ y) / n + lam / 2 * w @ w
    ob = lam / 2 * w @ w + np.maximum(1 - y * (a.T @ w), 0).sum() / n
    return oa, ob


def random_walk(problem, rng, steps):
    st_ = problem.initial_state()
    for _ in range(steps):
        i = int(rng.integers(problem.n))
        problem.apply_update(st_, i, problem.coordinate_update(st_, i))
    return st_


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_lasso_gap_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    p, a, y = random_lasso(rng, int(rng.integers(1, 12)), int(rng.integers(1, 12)))
    s = random_walk(p, rng, int(rng.integers(0, 40)))
    oa, ob = lasso_objectives(a, y, p.lam, p.radius, s.alpha)
    g = p.coordinate_gaps(s)
    assert p.dual_obj(s) == pytest.approx(oa, rel=1e-12, abs=1e-12)
    assert p.primal_obj(s) == pytest.approx(ob, rel=1e-9, abs=1e-9)
    assert abs(g.sum() - (oa + ob)) <= 1e-9 * max(1.0, abs(oa))
    assert g.min() >= -1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_svm_gap_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    p, a, y = random_svm(rng, int(rng.integers(1, 12)), int(rng.integers(1, 12)))
    s = random_walk(p, rng, int(rng.integers(0, 40)))
    oa, ob = svm_objectives(a, y, p.lam, s.alpha)
    g = p.coordinate_gaps(s)
    assert p.dual_obj(s) == pytest.approx(oa, rel=1e-12, abs=1e-12)
    assert abs(g.sum() - (oa + ob)) <= 1e-9 * max(1.0, abs(oa))
    assert g.min() >= -1e-12
    assert p.in_box(s)


def test_gap_nonnegative_at_arbitrary_feasible_points(rng):
    for _ in range(50):
        p, a, y = random_lasso(rng, 6, 8)
        alpha = rng.uniform(-1, 1, 8) * p.radius
        s = p.state_at(alpha)
        assert p.coordinate_gaps(s).min() >= -1e-9 * max(1.0, p.radius)
        q, a, y = random_svm(rng, 6, 8)
        s = q.state_at(y * rng.random(8))
        assert q.coordinate_gaps(s).min() >= -1e-12


def test_soft_threshold():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.5, 1.0) == 0.0


def test_one_coordinate_lasso_closed_form():
    ds = Dataset(SparseColumnMatrix.from_dense([[1.0]]), [1.0], FEATURES)
    p = Lasso(ds, 0.1)
    s = p.initial_state()
    p.apply_update(s, 0, p.coordinate_update(s, 0))
    assert s.alpha[0] == pytest.approx(0.95, abs=1e-15)
    assert p.total_gap(s) == pytest.approx(0.0, abs=1e-14)


def test_zero_target_lasso_is_solved_at_start():
    ds = Dataset(SparseColumnMatrix.from_dense(np.eye(3)), np.zeros(3), FEATURES)
    p = Lasso(ds, 0.5)
    assert p.degenerate and p.radius == 0.0
    s = p.initial_state()
    assert p.dual_obj(s) == 0.0 and p.total_gap(s) == 0.0
    assert np.all(p.residuals(s) == 0.0)


def test_lambda_max_makes_zero_optimal(rng):
    p, a, y = random_lasso(rng, 8, 10)
    lmax = lasso_lambda_max(p.dataset)
    q = Lasso(p.dataset, lmax * (1 + 1e-12))
    s = q.initial_state()
    assert q.total_gap(s) == pytest.approx(0.0, abs=1e-9)
    assert q.coordinate_update(s, int(np.argmax(np.abs(a.T @ y)))) == 0.0


def test_lasso_residual_cases():
    ds = Dataset(SparseColumnMatrix.from_dense(np.eye(2)), [1.0, 1.0], FEATURES)
    p = Lasso(ds, 1.0)
    B = p.radius
    alpha = np.array([0.3, -0.2, B, 0.0, -B])
    c = np.array([0.5, 1.0, 2.0, -3.0, -1.0])
    k, u = p.residuals_from(alpha, c)
    # |c| < lam -> {0}; |c| = lam -> segment between 0 and -B sign c; |c| > lam -> -B sign c
    np.testing.assert_allclose(u, [0.0, -0.2, -B, B, 0.0])
    np.testing.assert_allclose(k, [0.3, 0.0, 2 * B, B, B])


def test_lasso_boundary_case_attains_twice_lipschitz():
    ds = Dataset(SparseColumnMatrix.from_dense([[1.0]]), [2.0], FEATURES)
    p = Lasso(ds, 1.0)
    k, _ = p.residuals_from(np.array([p.radius]), np.array([5.0]))
    assert abs(k[0] - 2 * p.lipschitz[0]) <= 1e-12 * p.radius


def test_svm_residual_cases():
    ds = Dataset(SparseColumnMatrix.from_dense(np.eye(3)), [1.0, -1.0, 1.0], DATAPOINTS)
    p = HingeSVM(ds, 1.0)
    alpha = np.array([0.0, -0.5, 1.0])
    c = np.array([0.5, 1.0, 2.0])     # margins 0.5, -1.0, 2.0
    k, u = p.residuals_from(alpha, c)
    np.testing.assert_allclose(u, [1.0, -1.0, 0.0])
    np.testing.assert_allclose(k, [1.0, 0.5, 1.0])
    k, u = p.residuals_from(np.array([0.4]), np.array([1.0]), idx=[0])
    assert k[0] == 0.0 and u[0] == 0.4


def test_svm_w_is_sdca_primal(rng):
    p, a, y = random_svm(rng, 5, 9)
    s = random_walk(p, rng, 50)
    np.testing.assert_allclose(s.w, a @ s.alpha / (p.lam * p.n), atol=1e-12)
    assert p.recompute(s) < 1e-10


def test_lasso_w_tracks_residual(rng):
    p, a, y = random_lasso(rng, 5, 9)
    s = random_walk(p, rng, 50)
    np.testing.assert_allclose(s.w, 2 * (a @ s.alpha - y), atol=1e-12)
    assert p.in_ball(s)


def test_constructor_checks():
    ds = Dataset(SparseColumnMatrix.from_dense(np.eye(2)), [1.0, -1.0], DATAPOINTS)
    with pytest.raises(DataError):
        Lasso(ds, 1.0)
    with pytest.raises(ValueError):
        HingeSVM(ds, 0.0)
    with pytest.raises(DataError):
        HingeSVM(ds.transposed(FEATURES), 1.0)
    assert make_problem("lasso", ds, 1.0).kind == "lasso"
    assert make_problem("svm", ds, 1.0).kind == "svm"
    with pytest.raises(ValueError):
        make_problem("logistic", ds, 1.0)
    assert compute_support_radius([3.0, 4.0], 5.0) == 5.0


def test_zero_column_never_moves():
    ds = Dataset(SparseColumnMatrix.from_dense([[1.0, 0.0], [0.0, 0.0]]), [1.0, 2.0], FEATURES)
    p = Lasso(ds, 0.1)
    s = p.initial_state()
    assert p.coordinate_update(s, 1) == 0.0
    assert p.active.tolist() == [True, False]
