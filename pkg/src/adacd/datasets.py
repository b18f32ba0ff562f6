"""Dataset container, LIBSVM ingestion and instance generators."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .linalg import SparseColumnMatrix

DATAPOINTS = "datapoints"  # columns are datapoints (SVM dual)
FEATURES = "features"      # columns are features (Lasso)


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


class LibSVMParseError(DataError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class Dataset:
    """A data matrix plus its targets.

    With ``orientation == "datapoints"`` the targets are one label per column;
    with ``orientation == "features"`` they are one regression target per row.
    ``coef`` optionally carries the generating coefficients of synthetic data.
    """

    matrix: SparseColumnMatrix
    targets: np.ndarray
    orientation: str = DATAPOINTS
    name: str = ""
    coef: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.targets, dtype=np.float64)
        object.__setattr__(self, "targets", t)
        if self.orientation not in (DATAPOINTS, FEATURES):
            raise DataError(f"unknown orientation {self.orientation!r}")
        want = self.matrix.n_cols if self.orientation == DATAPOINTS else self.matrix.n_rows
        if t.shape != (want,):
            raise DataError(f"expected {want} targets for {self.orientation} orientation, "
                            f"got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise DataError("targets must be finite")

    @property
    def d(self) -> int:
        return self.matrix.n_rows

    @property
    def n(self) -> int:
        return self.matrix.n_cols

    @property
    def density(self) -> float:
        size = self.d * self.n
        return self.matrix.nnz / size if size else 0.0

    def transposed(self, orientation: str) -> "Dataset":
        if orientation == self.orientation:
            return self
        return replace(self, matrix=self.matrix.transpose(), orientation=orientation,
                       coef=None)

    def for_lasso(self) -> "Dataset":
        """Features as columns, targets as the regression vector ``y``."""
        return self.transposed(FEATURES)

    def for_svm(self) -> "Dataset":
        """Datapoints as columns with labels mapped to +-1."""
        ds = self.transposed(DATAPOINTS)
        return replace(ds, targets=binary_labels(ds.targets))

    def stats(self) -> dict:
        """Summary statistics of the column norms.

        ``cv_mean_over_std`` is the ratio as printed in the usual dataset table
        header; ``cv_std_over_mean`` is the conventional coefficient of variation.
        Both are reported since the two disagree.
        """
        norms = self.matrix.column_norms
        mu = float(norms.mean()) if norms.size else 0.0
        sd = float(norms.std()) if norms.size else 0.0
        return {
            "d": self.d,
            "n": self.n,
            "nnz": self.matrix.nnz,
            "density": self.density,
            "cv_mean_over_std": mu / sd if sd > 0 else math.inf,
            "cv_std_over_mean": sd / mu if mu > 0 else math.inf,
        }


def binary_labels(targets) -> np.ndarray:
    """Map a two-valued target vector to +-1 (larger value -> +1)."""
    t = np.asarray(targets, dtype=np.float64)
    values = np.unique(t)
    if values.size == 0 or set(values.tolist()) <= {-1.0, 1.0}:
        return t.copy()
    if values.size != 2:
        raise DataError(f"classification needs two label values, found {values.size}")
    return np.where(t == values[1], 1.0, -1.0)


# -- LIBSVM text format ---------------------------------------------------

def load_libsvm(path, n_features: int | None = None, strict: bool = False,
                name: str | None = None) -> Dataset:
    """Read a LIBSVM file into a datapoints-as-columns :class:`Dataset`.

    Feature indices are 1-based on disk and 0-based in memory.  ``d`` is the
    largest feature index seen unless ``n_features`` is given.  An empty file
    yields zero datapoints, or raises when ``strict``.
    """
    path = Path(path)
    labels: list[float] = []
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    max_index = 0
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise LibSVMParseError(lineno, f"bad label {tokens[0]!r}") from None
            if not math.isfinite(label):
                raise LibSVMParseError(lineno, "non-finite label")
            prev = 0
            for tok in tokens[1:]:
                key, sep, val = tok.partition(":")
                if not sep:
                    raise LibSVMParseError(lineno, f"expected idx:val, got {tok!r}")
                try:
                    idx = int(key)
                    value = float(val)
                except ValueError:
                    raise LibSVMParseError(lineno, f"bad pair {tok!r}") from None
                if idx <= prev:
                    raise LibSVMParseError(lineno, "feature indices must be 1-based and "
                                                   f"strictly increasing ({tok!r})")
                if not math.isfinite(value):
                    raise LibSVMParseError(lineno, f"non-finite value in {tok!r}")
                prev = idx
                if n_features is not None and idx > n_features:
                    raise LibSVMParseError(lineno, f"feature {idx} exceeds n_features={n_features}")
                if value != 0.0:
                    indices.append(idx - 1)
                    data.append(value)
            max_index = max(max_index, prev)
            labels.append(label)
            indptr.append(len(indices))
    if not labels and strict:
        raise DataError(f"{path}: no datapoints")
    d = n_features if n_features is not None else max_index
    m = SparseColumnMatrix(d, len(labels), indptr, indices, data)
    return Dataset(m, np.array(labels), DATAPOINTS, name=name or path.name)


def write_libsvm(ds: Dataset, path) -> None:
    """Write ``ds`` in LIBSVM format with shortest round-trip float text."""
    ds = ds.transposed(DATAPOINTS)
    m = ds.matrix
    with open(path, "w") as fh:
        for j in range(m.n_cols):
            idx, val = m.column(j)
            pairs = " ".join(f"{i + 1}:{v!r}" for i, v in zip(idx.tolist(), val.tolist()))
            lab = ds.targets[j]
            lab_txt = str(int(lab)) if float(lab).is_integer() else repr(float(lab))
            fh.write(f"{lab_txt} {pairs}".rstrip() + "\n")


# -- transforms -----------------------------------------------------------

def normalize_columns(ds: Dataset, mode: str = "unit_l2") -> Dataset:
    """Scale every column to unit Euclidean norm (``mode="unit_l2"``)."""
    if mode == "none":
        return ds
    if mode != "unit_l2":
        raise ValueError(f"unknown normalization mode {mode!r}")
    norms = ds.matrix.column_norms
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DataError(f"column {int(zero[0])} is all zero and cannot be normalized")
    return replace(ds, matrix=ds.matrix.scale_columns(1.0 / norms), coef=None)


def drop_empty(ds: Dataset) -> Dataset:
    """Remove all-zero rows and columns."""
    csc = ds.matrix.to_scipy()
    rows = np.flatnonzero(np.diff(csc.tocsr().indptr) > 0)
    cols = np.flatnonzero(np.diff(csc.indptr) > 0)
    return _select(ds, rows, cols)


def _select(ds: Dataset, rows, cols) -> Dataset:
    csc = ds.matrix.to_scipy()[rows, :][:, cols]
    targets = ds.targets[cols] if ds.orientation == DATAPOINTS else ds.targets[rows]
    return replace(ds, matrix=SparseColumnMatrix.from_scipy(csc), targets=targets, coef=None)


def subsample(ds: Dataset, n_rows: int, n_cols: int, seed: int) -> Dataset:
    """Pick rows and columns uniformly without replacement, then drop empty ones."""
    if not (0 <= n_rows <= ds.d and 0 <= n_cols <= ds.n):
        raise ValueError(f"cannot take {n_rows}x{n_cols} from a {ds.d}x{ds.n} matrix")
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(ds.d, size=n_rows, replace=False))
    cols = np.sort(rng.choice(ds.n, size=n_cols, replace=False))
    return drop_empty(_select(ds, rows, cols))


# -- synthetic instances --------------------------------------------------

def synthetic_lasso(d: int, n: int, support_frac: float, noise: float, seed: int,
                    density: float = 1.0, norm_spread: float = 0.0) -> Dataset:
    """Regression instance ``y = A coef + noise * N(0, I)`` with a sparse ``coef``.

    Columns of ``A`` are features.  ``ceil(support_frac * n)`` coefficients are
    nonzero.  With ``density < 1`` each entry of ``A`` is kept with that
    probability.  ``norm_spread > 0`` rescales each column by
    ``exp(norm_spread * N(0, 1))`` so column norms are heterogeneous.
    """
    if not 0.0 < support_frac <= 1.0:
        raise ValueError("support_frac must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, n))
    if density < 1.0:
        a *= rng.random((d, n)) < density
    a /= math.sqrt(d)
    if norm_spread:
        a *= np.exp(norm_spread * rng.standard_normal(n))
    k = math.ceil(support_frac * n)
    coef = np.zeros(n)
    support = rng.choice(n, size=k, replace=False)
    coef[support] = rng.standard_normal(k)
    m = SparseColumnMatrix.from_dense(a)
    y = m.matvec(coef) + noise * rng.standard_normal(d)
    return Dataset(m, y, FEATURES, name=f"synthetic-lasso-{d}x{n}-s{seed}", coef=coef)


def synthetic_svm(d: int, n: int, density: float, flip: float, seed: int) -> Dataset:
    """Binary classification points ``x_j`` as columns, labels ``sign(w.x_j)``.

    A fraction ``flip`` of labels is inverted so the data are not separable.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((d, n))
    if density < 1.0:
        x *= rng.random((d, n)) < density
    x /= math.sqrt(d)
    w = rng.standard_normal(d)
    labels = np.where(w @ x >= 0.0, 1.0, -1.0)
    labels[rng.random(n) < flip] *= -1.0
    m = SparseColumnMatrix.from_dense(x)
    return Dataset(m, labels, DATAPOINTS, name=f"synthetic-svm-{d}x{n}-s{seed}", coef=w)
