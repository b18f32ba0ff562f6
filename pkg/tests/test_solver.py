import math

import numpy as np
import pytest

from adacd.datasets import FEATURES, Dataset, synthetic_lasso, synthetic_svm
from adacd.linalg import SparseColumnMatrix
from adacd.problems import HingeSVM, Lasso, lasso_lambda_max
from adacd.sampling import VARIANTS
from adacd.solver import NumericalAbort, SolverConfig, Termination, run


@pytest.fixture(scope="module")
def lasso():
    ds = synthetic_lasso(20, 30, 0.15, 0.05, seed=0)
    return Lasso(ds, 0.2 * lasso_lambda_max(ds))


@pytest.fixture(scope="module")
def svm():
    return HingeSVM(synthetic_svm(10, 40, 1.0, 0.1, seed=0), 0.05)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig("uniform", max_epochs=0)
    with pytest.raises(ValueError):
        SolverConfig("uniform", gap_tol=-1)
    with pytest.raises(ValueError):
        SolverConfig("uniform", trace_every=0)
    assert SolverConfig("ada-gap").scheme.variant == "ada_gap"


def test_one_row_per_epoch_and_budget(lasso):
    res = run(lasso, SolverConfig("uniform", max_epochs=5, seed=1))
    assert res.termination in (Termination.BUDGET, Termination.SUPPORT)
    if res.termination is Termination.BUDGET:
        assert [r.epoch for r in res.trace] == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
    # update path: one dot plus one axpy per iteration
    assert res.update_ops.column_ops == 2 * res.final.iterations
    assert res.refresh_ops.column_ops == 0


def test_gap_tol_mid_epoch_emits_partial_row(lasso):
    res = run(lasso, SolverConfig("ada_gap", max_epochs=50, gap_tol=1e-6, seed=0))
    assert res.termination is Termination.GAP
    assert res.final.gap <= 1e-6
    assert res.final.iterations % lasso.n != 0
    assert res.trace[-2].gap > 1e-6


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("kind", ["lasso", "svm"])
def test_all_schemes_descend_and_certify(variant, kind, lasso, svm):
    p = lasso if kind == "lasso" else svm
    res = run(p, SolverConfig(variant, max_epochs=4, seed=3, record_theory=True))
    gaps = [r.gap for r in res.trace]
    objs = [r.dual_obj for r in res.trace]
    assert all(b <= a + 1e-12 for a, b in zip(objs, objs[1:]))
    assert gaps[-1] < gaps[0]
    assert all(g >= -1e-9 for g in gaps)
    th = res.theory
    assert th.clean, (th.monotone_violations[:3], th.descent_violations[:3],
                      th.kappa_violations[:3], th.coherence_violations[:3])
    assert th.checked == res.final.iterations
    assert all(r.drift < 1e-8 for r in res.trace)


def test_determinism(lasso):
    a = run(lasso, SolverConfig("adaptive", max_epochs=3, seed=11))
    b = run(lasso, SolverConfig("adaptive", max_epochs=3, seed=11))
    np.testing.assert_array_equal(a.state.alpha, b.state.alpha)
    assert [r.gap for r in a.trace] == [r.gap for r in b.trace]
    c = run(lasso, SolverConfig("adaptive", max_epochs=3, seed=12))
    assert not np.array_equal(a.state.alpha, c.state.alpha)


def test_support_empty_at_optimum():
    ds = Dataset(SparseColumnMatrix.from_dense(np.eye(3)), [1.0, -2.0, 0.5], FEATURES)
    p = Lasso(ds, 0.1)
    # orthogonal design: one sweep of exact updates solves it
    for v in ("adaptive", "supportset_uniform", "ada_uniform"):
        res = run(p, SolverConfig(v, max_epochs=10, seed=0))
        assert res.termination is Termination.SUPPORT
        np.testing.assert_allclose(res.state.alpha, [0.95, -1.95, 0.45], atol=1e-14)
        assert res.final.support_size == 0
    res = run(p, SolverConfig("ada_gap", max_epochs=10, seed=0))
    assert res.termination in (Termination.SUPPORT, Termination.GAP)


def test_zero_target_stops_immediately():
    ds = Dataset(SparseColumnMatrix.from_dense(np.eye(2)), [0.0, 0.0], FEATURES)
    res = run(Lasso(ds, 1.0), SolverConfig("uniform", max_epochs=5))
    assert res.final.iterations == 0
    assert res.termination is Termination.SUPPORT
    assert len(res.trace) == 1


def test_refresh_counts(lasso):
    n = lasso.n
    r = run(lasso, SolverConfig("gap_per_epoch", max_epochs=3, seed=0))
    if r.termination is Termination.BUDGET:
        assert r.refresh_count == 3
        assert r.refresh_ops.column_ops == 3 * n
    r = run(lasso, SolverConfig("importance", max_epochs=3, seed=0))
    assert r.refresh_count == 1 and r.refresh_ops.column_ops == 0


def test_suboptimality_column(lasso):
    res = run(lasso, SolverConfig("uniform", max_epochs=2, suboptimality_ref=1.0))
    assert res.final.suboptimality == pytest.approx(res.final.dual_obj - 1.0)


class _Exploding(Lasso):
    def dual_obj(self, state):
        return math.nan if state.t > 5 else super().dual_obj(state)


def test_numerical_abort_carries_state():
    ds = synthetic_lasso(5, 8, 0.5, 0.0, seed=0)
    p = _Exploding(ds, 0.01)
    with pytest.raises(NumericalAbort) as exc:
        run(p, SolverConfig("uniform", max_epochs=3, trace_every=4))
    assert exc.value.state is not None and exc.value.t == 8
