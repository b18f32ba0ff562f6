"""Column-major sparse storage and counted vector kernels.

The solver touches one column of the data matrix per iteration, so the matrix
is stored by columns only.  Every kernel that reads or writes a column reports
the touch to an :class:`OpCounter`, which is how per-epoch costs are audited.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass
class OpCounter:
    """Tally of column touches.

    ``column_ops`` counts whole-column kernels (one dot or one axpy each);
    ``nnz_ops`` counts the stored entries those kernels read.
    """

    column_ops: int = 0
    nnz_ops: int = 0

    def add(self, columns: int, nnz: int) -> None:
        self.column_ops += int(columns)
        self.nnz_ops += int(nnz)

    def snapshot(self) -> tuple[int, int]:
        return self.column_ops, self.nnz_ops


class SparseColumnMatrix:
    """A ``d x n`` matrix held as ``n`` sorted sparse columns.

    Parameters
    ----------
    n_rows, n_cols : int
        Shape ``(d, n)``.
    indptr, indices, data : array_like
        Compressed sparse column arrays.  Row indices within a column must be
        strictly increasing and every stored value nonzero.
    """

    def __init__(self, n_rows, n_cols, indptr, indices, data, check=True):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        if check:
            self._validate()
        owner = np.repeat(np.arange(self.n_cols), np.diff(self.indptr))
        self.column_norms_sq = np.bincount(owner, weights=self.data ** 2,
                                           minlength=self.n_cols).astype(np.float64)
        self.column_norms = np.sqrt(self.column_norms_sq)
        self._csc = sp.csc_matrix((self.data, self.indices, self.indptr),
                                  shape=(self.n_rows, self.n_cols))
        self._csr_t = self._csc.T.tocsr()

    def _validate(self):
        if self.indptr.shape != (self.n_cols + 1,) or self.indptr[0] != 0:
            raise ValueError("indptr must have length n_cols + 1 and start at 0")
        if np.any(np.diff(self.indptr) < 0) or self.indptr[-1] != self.indices.size:
            raise ValueError("indptr must be nondecreasing and end at nnz")
        if self.indices.size != self.data.size:
            raise ValueError("indices and data differ in length")
        if self.indices.size:
            if self.indices.min() < 0 or self.indices.max() >= self.n_rows:
                raise ValueError("row index out of range")
            is_start = np.zeros(self.indices.size, dtype=bool)
            starts = self.indptr[:-1]
            is_start[starts[starts < self.indices.size]] = True
            if np.any(~is_start[1:] & (np.diff(self.indices) <= 0)):
                raise ValueError("row indices within a column must be strictly increasing")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("matrix values must be finite")
        if np.any(self.data == 0.0):
            raise ValueError("stored values must be nonzero")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_scipy(cls, m) -> "SparseColumnMatrix":
        csc = sp.csc_matrix(m, dtype=np.float64, copy=True)
        csc.eliminate_zeros()
        csc.sort_indices()
        csc.sum_duplicates()
        return cls(csc.shape[0], csc.shape[1], csc.indptr, csc.indices, csc.data)

    @classmethod
    def from_dense(cls, a) -> "SparseColumnMatrix":
        return cls.from_scipy(sp.csc_matrix(np.asarray(a, dtype=np.float64)))

    @classmethod
    def from_columns(cls, n_rows, columns) -> "SparseColumnMatrix":
        """Build from a sequence of ``[(row, value), ...]`` lists."""
        indptr = [0]
        indices, data = [], []
        for col in columns:
            for r, v in col:
                indices.append(r)
                data.append(v)
            indptr.append(len(indices))
        return cls(n_rows, len(columns), indptr, indices, data)

    # -- access -----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    def column(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Row indices and values of column ``i`` (views, do not mutate)."""
        self._check_index(i)
        s, e = self.indptr[i], self.indptr[i + 1]
        return self.indices[s:e], self.data[s:e]

    def column_nnz(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    def column_norm(self, i: int) -> float:
        self._check_index(i)
        return float(self.column_norms[i])

    def _check_index(self, i):
        if not 0 <= i < self.n_cols:
            raise IndexError(f"column index {i} out of range [0, {self.n_cols})")

    def to_scipy(self) -> sp.csc_matrix:
        return self._csc.copy()

    def toarray(self) -> np.ndarray:
        return self._csc.toarray()

    def transpose(self) -> "SparseColumnMatrix":
        return SparseColumnMatrix.from_scipy(self._csc.T)

    def scale_columns(self, factors) -> "SparseColumnMatrix":
        factors = np.asarray(factors, dtype=np.float64)
        data = self.data * np.repeat(factors, np.diff(self.indptr))
        return SparseColumnMatrix(self.n_rows, self.n_cols, self.indptr,
                                  self.indices, data)

    # -- counted kernels --------------------------------------------------

    def column_dot(self, i: int, v: np.ndarray, counter: OpCounter | None = None) -> float:
        """Return ``a_i . v`` over the stored entries of column ``i``."""
        idx, val = self.column(i)
        if counter is not None:
            counter.add(1, idx.size)
        return float(val @ v[idx])

    def add_scaled_column(self, v: np.ndarray, i: int, c: float,
                          counter: OpCounter | None = None) -> np.ndarray:
        """In place ``v += c * a_i``; returns ``v``."""
        idx, val = self.column(i)
        if counter is not None:
            counter.add(1, idx.size)
        v[idx] += c * val
        return v

    def rmatvec(self, v: np.ndarray, counter: OpCounter | None = None) -> np.ndarray:
        """All column dots ``A^T v`` in one pass (``n`` column-ops)."""
        if counter is not None:
            counter.add(self.n_cols, self.nnz)
        return self._csr_t @ v

    def matvec(self, x: np.ndarray, counter: OpCounter | None = None) -> np.ndarray:
        """``A x`` accumulated column by column (``n`` column-ops)."""
        if counter is not None:
            counter.add(self.n_cols, self.nnz)
        return self._csc @ x

    def __repr__(self):
        return f"SparseColumnMatrix(shape={self.shape}, nnz={self.nnz})"
