import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from adacd.linalg import OpCounter, SparseColumnMatrix


def test_column_dot_examples():
    m = SparseColumnMatrix.from_columns(3, [[(1, 2.0)], []])
    assert m.column_dot(0, np.ones(3)) == 2.0
    assert m.column_dot(1, np.ones(3)) == 0.0


def test_counter_counts_one_column_op_per_kernel():
    m = SparseColumnMatrix.from_columns(4, [[(0, 1.0), (3, -2.0)], [(2, 5.0)]])
    c = OpCounter()
    m.column_dot(0, np.ones(4), c)
    m.add_scaled_column(np.zeros(4), 1, 3.0, c)
    assert c.snapshot() == (2, 3)
    m.rmatvec(np.ones(4), c)
    assert c.snapshot() == (4, 6)


@pytest.mark.parametrize("bad", [
    dict(indptr=[0, 2], indices=[1, 1], data=[1.0, 2.0]),      # repeated row
    dict(indptr=[0, 2], indices=[2, 1], data=[1.0, 2.0]),      # decreasing
    dict(indptr=[0, 1], indices=[5], data=[1.0]),              # out of range
    dict(indptr=[0, 1], indices=[0], data=[0.0]),              # stored zero
    dict(indptr=[0, 1], indices=[0], data=[np.nan]),           # non-finite
    dict(indptr=[1, 1], indices=[], data=[]),                  # bad indptr
])
def test_invalid_layout_rejected(bad):
    with pytest.raises(ValueError):
        SparseColumnMatrix(3, 1, **bad)


def test_index_out_of_range():
    m = SparseColumnMatrix.from_dense(np.eye(2))
    with pytest.raises(IndexError):
        m.column_dot(2, np.ones(2))
    with pytest.raises(IndexError):
        m.column(-1)


def test_rows_may_restart_across_columns():
    m = SparseColumnMatrix(3, 2, [0, 2, 4], [1, 2, 0, 1], [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(m.toarray(), [[0, 3], [1, 4], [2, 0]])


dense = st.integers(1, 8).flatmap(lambda d: st.integers(1, 8).flatmap(
    lambda n: hnp.arrays(np.float64, (d, n),
                         elements=st.one_of(st.just(0.0), st.floats(-10, 10, allow_nan=False)))))


@settings(max_examples=60, deadline=None)
@given(a=dense, seed=st.integers(0, 2**32 - 1))
def test_kernels_match_dense_oracle(a, seed):
    rng = np.random.default_rng(seed)
    m = SparseColumnMatrix.from_dense(a)
    d, n = a.shape
    v = rng.standard_normal(d)
    x = rng.standard_normal(n)
    for i in range(n):
        assert m.column_dot(i, v) == pytest.approx(float(a[:, i] @ v), abs=1e-12, rel=1e-14)
        w = v.copy()
        m.add_scaled_column(w, i, 0.7)
        np.testing.assert_allclose(w, v + 0.7 * a[:, i], rtol=1e-14, atol=1e-14)
        assert m.column_norm(i) == pytest.approx(np.linalg.norm(a[:, i]), rel=1e-14, abs=0)
    np.testing.assert_allclose(m.rmatvec(v), a.T @ v, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(m.matvec(x), a @ x, rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(m.toarray(), a)
    np.testing.assert_array_equal(m.transpose().toarray(), a.T)


def test_from_scipy_drops_explicit_zeros_and_sorts():
    csc = sp.csc_matrix((np.array([0.0, 2.0, 1.0]), np.array([0, 2, 1]), np.array([0, 3])),
                        shape=(3, 1))
    m = SparseColumnMatrix.from_scipy(csc)
    idx, val = m.column(0)
    assert idx.tolist() == [1, 2] and val.tolist() == [1.0, 2.0]


def test_scale_columns():
    m = SparseColumnMatrix.from_dense([[3.0, 0.0], [4.0, 2.0]])
    s = m.scale_columns([0.2, 0.5])
    np.testing.assert_allclose(s.toarray(), [[0.6, 0.0], [0.8, 1.0]])
