"""Lasso and hinge-loss SVM as instances of the separable template

    O_A(alpha) = f(A alpha) + sum_i g_i(alpha_i)
    O_B(w)     = f*(w) + sum_i g_i*(-a_i . w)

with the primal point tied to alpha through ``w = grad f(A alpha)``.

Both problems keep the raw data matrix and expose template-scale quantities
(``norms_sq``, ``beta``, ``lipschitz``) for the theory layer.  For the SVM the
template columns are ``a_i / n`` so that ``w`` is exactly the classic SDCA
primal vector ``(1/(lam n)) sum_i alpha_i a_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasets import DATAPOINTS, FEATURES, Dataset, DataError, binary_labels
from .linalg import OpCounter, SparseColumnMatrix

# relative width of the subdifferential kink treated as "on the boundary"
BOUNDARY_RTOL = 1e-9


@dataclass
class PrimalDualState:
    """Mutable iterate of one solver run."""

    alpha: np.ndarray
    w: np.ndarray
    image: np.ndarray
    counter: OpCounter = field(default_factory=OpCounter)
    t: int = 0

    def copy(self) -> "PrimalDualState":
        return PrimalDualState(self.alpha.copy(), self.w.copy(), self.image.copy(),
                               OpCounter(*self.counter.snapshot()), self.t)


def soft_threshold(x: float, tau: float) -> float:
    """``sign(x) * max(|x| - tau, 0)``."""
    if x > tau:
        return x - tau
    if x < -tau:
        return x + tau
    return 0.0


def _segment_distance(alpha, lo, hi):
    """Distance from ``alpha`` to ``[lo, hi]`` and the nearest point (vectorized)."""
    u = np.clip(alpha, lo, hi)
    return np.abs(alpha - u), u


class Problem:
    """Shared machinery; subclasses fill in the problem-specific formulas."""

    kind = ""
    matrix: SparseColumnMatrix
    lam: float
    beta: float
    lipschitz: np.ndarray
    strong_convexity: np.ndarray
    norms_sq: np.ndarray  # template-scale ||a_i||^2

    @property
    def n(self) -> int:
        return self.matrix.n_cols

    @property
    def d(self) -> int:
        return self.matrix.n_rows

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(self.norms_sq)

    @property
    def active(self) -> np.ndarray:
        """Mask of coordinates that can be sampled (nonzero columns)."""
        return self.matrix.column_norms_sq > 0.0

    # subclass hooks
    def initial_state(self) -> PrimalDualState:
        raise NotImplementedError

    def _image_from_alpha(self, alpha, counter=None) -> np.ndarray:
        raise NotImplementedError

    def w_from_image(self, image) -> np.ndarray:
        raise NotImplementedError

    def dual_obj(self, state) -> float:
        raise NotImplementedError

    def primal_obj_from(self, w, c) -> float:
        raise NotImplementedError

    def gaps_from(self, alpha, c) -> np.ndarray:
        raise NotImplementedError

    def residuals_from(self, alpha, c, rtol=BOUNDARY_RTOL):
        raise NotImplementedError

    def coordinate_update(self, state, i, counter=None) -> float:
        raise NotImplementedError

    def apply_update(self, state, i, delta, counter=None) -> None:
        raise NotImplementedError

    # shared
    def margins(self, w, counter: OpCounter | None = None) -> np.ndarray:
        """Raw ``a_i . w`` for every column (one full pass)."""
        return self.matrix.rmatvec(w, counter)

    def recompute(self, state, counter: OpCounter | None = None) -> float:
        """Rebuild ``image`` and ``w`` from ``alpha``; return the relative drift of ``w``."""
        image = self._image_from_alpha(state.alpha, counter)
        w = self.w_from_image(image)
        scale = max(float(np.linalg.norm(w)), 1e-300)
        drift = float(np.linalg.norm(state.w - w)) / scale
        state.image = image
        state.w = w
        return drift

    def state_at(self, alpha) -> PrimalDualState:
        """Consistent state (``image`` and ``w`` rebuilt) at the given ``alpha``."""
        alpha = np.array(alpha, dtype=np.float64)
        if alpha.shape != (self.n,):
            raise ValueError(f"alpha must have length {self.n}")
        image = self._image_from_alpha(alpha)
        return PrimalDualState(alpha, self.w_from_image(image), image)

    def primal_obj(self, state) -> float:
        return self.primal_obj_from(state.w, self.margins(state.w))

    def coordinate_gaps(self, state) -> np.ndarray:
        return self.gaps_from(state.alpha, self.margins(state.w))

    def coordinate_gap(self, state, i: int) -> float:
        c = self.matrix.column_dot(i, state.w)
        return float(self.gaps_from(state.alpha[i:i + 1], np.array([c]), idx=[i])[0])

    def total_gap(self, state) -> float:
        return float(self.coordinate_gaps(state).sum())

    def residuals(self, state, rtol=BOUNDARY_RTOL) -> np.ndarray:
        return self.residuals_from(state.alpha, self.margins(state.w), rtol)[0]

    def dual_residual(self, state, i: int, rtol=BOUNDARY_RTOL) -> tuple[float, float]:
        """Residual ``kappa_i`` and the nearest subgradient point ``u_i``."""
        c = self.matrix.column_dot(i, state.w)
        k, u = self.residuals_from(state.alpha[i:i + 1], np.array([c]), rtol, idx=[i])
        return float(k[0]), float(u[0])


class Lasso(Problem):
    """``min ||A alpha - y||^2 + lam ||alpha||_1`` with features as columns.

    The l1 term is restricted to ``|alpha_i| <= B`` so that its conjugate
    ``B [|u| - lam]_+`` is ``B``-Lipschitz.  ``B`` defaults to
    ``f(0) / lam = ||y||^2 / lam``, which monotone descent never leaves.
    """

    kind = "lasso"

    def __init__(self, dataset: Dataset, lam: float, radius: float | None = None):
        if dataset.orientation != FEATURES:
            raise DataError("Lasso needs a features-as-columns dataset (use Dataset.for_lasso)")
        if not lam > 0:
            raise ValueError("lam must be positive")
        self.dataset = dataset
        self.matrix = dataset.matrix
        self.y = dataset.targets
        self.lam = float(lam)
        self.radius = compute_support_radius(self.y, self.lam) if radius is None else float(radius)
        self.beta = 0.5
        self.lipschitz = np.full(self.n, self.radius)
        self.strong_convexity = np.zeros(self.n)
        self.norms_sq = self.matrix.column_norms_sq

    @property
    def degenerate(self) -> bool:
        return self.radius == 0.0

    def initial_state(self) -> PrimalDualState:
        alpha = np.zeros(self.n)
        image = np.zeros(self.d)
        return PrimalDualState(alpha, self.w_from_image(image), image)

    def _image_from_alpha(self, alpha, counter=None):
        return self.matrix.matvec(alpha, counter)

    def w_from_image(self, image):
        return 2.0 * (image - self.y)

    def dual_obj(self, state) -> float:
        r = state.image - self.y
        return float(r @ r + self.lam * np.abs(state.alpha).sum())

    def conjugate_f(self, w) -> float:
        return float(w @ self.y + 0.25 * (w @ w))

    def primal_obj_from(self, w, c) -> float:
        hinge = np.maximum(np.abs(c) - self.lam, 0.0)
        return self.conjugate_f(w) + self.radius * float(hinge.sum())

    def gaps_from(self, alpha, c, idx=None):
        return (self.radius * np.maximum(np.abs(c) - self.lam, 0.0)
                + self.lam * np.abs(alpha) + alpha * c)

    def residuals_from(self, alpha, c, rtol=BOUNDARY_RTOL, idx=None):
        # subdifferential of B[|v| - lam]_+ at v = -c
        excess = np.abs(c) - self.lam
        tol = rtol * self.lam
        far = -self.radius * np.sign(c)
        lo = np.where(excess > tol, far, np.where(excess < -tol, 0.0, np.minimum(0.0, far)))
        hi = np.where(excess > tol, far, np.where(excess < -tol, 0.0, np.maximum(0.0, far)))
        return _segment_distance(alpha, lo, hi)

    def coordinate_update(self, state, i, counter=None) -> float:
        q = self.norms_sq[i]
        if q == 0.0:
            return 0.0
        c = self.matrix.column_dot(i, state.w, counter)  # = 2 a_i . (A alpha - y)
        a = state.alpha[i]
        new = soft_threshold(a - 0.5 * c / q, 0.5 * self.lam / q)
        return new - a

    def apply_update(self, state, i, delta, counter=None) -> None:
        idx, val = self.matrix.column(i)
        if counter is not None:
            counter.add(1, idx.size)
        state.alpha[i] += delta
        state.t += 1
        if delta != 0.0:
            step = delta * val
            state.image[idx] += step
            state.w[idx] += 2.0 * step

    def in_ball(self, state, slack=1e-12) -> bool:
        return bool(np.max(np.abs(state.alpha), initial=0.0) <= self.radius * (1 + slack))


class HingeSVM(Problem):
    """Dual of the hinge-loss SVM with datapoints as columns and labels +-1.

    ``O_A(alpha) = -(1/n) sum_i alpha_i y_i + (lam/2) ||w||^2`` over the box
    ``alpha_i y_i in [0, 1]`` with ``w = (1/(lam n)) sum_i alpha_i a_i``;
    ``O_B(w) = (lam/2) ||w||^2 + (1/n) sum_i [1 - y_i a_i . w]_+``.
    """

    kind = "svm"

    def __init__(self, dataset: Dataset, lam: float):
        if dataset.orientation != DATAPOINTS:
            raise DataError("SVM needs a datapoints-as-columns dataset (use Dataset.for_svm)")
        if not lam > 0:
            raise ValueError("lam must be positive")
        y = dataset.targets
        if not np.all(np.abs(y) == 1.0):
            y = binary_labels(y)
        self.dataset = dataset
        self.matrix = dataset.matrix
        self.y = y
        self.lam = float(lam)
        n = self.n
        self.beta = self.lam
        # g_i has support {alpha_i y_i in [0,1]}, so g_i* is 1-Lipschitz
        self.lipschitz = np.ones(n)
        self.strong_convexity = np.zeros(n)
        self.norms_sq = self.matrix.column_norms_sq / float(n) ** 2 if n else np.zeros(0)

    def initial_state(self) -> PrimalDualState:
        alpha = np.zeros(self.n)
        image = np.zeros(self.d)
        return PrimalDualState(alpha, image.copy(), image)

    def _image_from_alpha(self, alpha, counter=None):
        return self.matrix.matvec(alpha, counter) / (self.lam * self.n)

    def w_from_image(self, image):
        return image.copy()

    def dual_obj(self, state) -> float:
        w = state.w
        return float(-(state.alpha @ self.y) / self.n + 0.5 * self.lam * (w @ w))

    def primal_obj_from(self, w, c) -> float:
        loss = np.maximum(1.0 - self.y * c, 0.0)
        return float(0.5 * self.lam * (w @ w) + loss.sum() / self.n)

    def gaps_from(self, alpha, c, idx=None):
        y = self.y if idx is None else self.y[idx]
        return (np.maximum(1.0 - y * c, 0.0) - alpha * y + alpha * c) / self.n

    def residuals_from(self, alpha, c, rtol=BOUNDARY_RTOL, idx=None):
        y = self.y if idx is None else self.y[idx]
        margin = y * c
        target = np.where(margin < 1.0 - rtol, y, 0.0)
        lo = np.where(np.abs(margin - 1.0) <= rtol, np.minimum(0.0, y), target)
        hi = np.where(np.abs(margin - 1.0) <= rtol, np.maximum(0.0, y), target)
        return _segment_distance(alpha, lo, hi)

    def coordinate_update(self, state, i, counter=None) -> float:
        q = self.matrix.column_norms_sq[i]
        if q == 0.0:
            return 0.0
        c = self.matrix.column_dot(i, state.w, counter)
        yi, a = self.y[i], state.alpha[i]
        scaled = (1.0 - yi * c) / (q / (self.lam * self.n)) + yi * a
        return yi * max(0.0, min(1.0, scaled)) - a

    def apply_update(self, state, i, delta, counter=None) -> None:
        idx, val = self.matrix.column(i)
        if counter is not None:
            counter.add(1, idx.size)
        state.alpha[i] += delta
        state.t += 1
        if delta != 0.0:
            step = (delta / (self.lam * self.n)) * val
            state.w[idx] += step
            state.image[idx] += step

    def in_box(self, state, slack=1e-12) -> bool:
        ay = state.alpha * self.y
        return bool(np.all(ay >= -slack) and np.all(ay <= 1.0 + slack))


def compute_support_radius(y, lam: float) -> float:
    """``B = f(A 0) / lam = ||y||^2 / lam`` for ``f(x) = ||x - y||^2``."""
    y = np.asarray(y, dtype=np.float64)
    return float(y @ y) / lam


def make_problem(kind: str, dataset: Dataset, lam: float) -> Problem:
    """Instantiate ``kind`` ("lasso" or "svm"), reorienting the dataset as needed."""
    if kind == "lasso":
        return Lasso(dataset.for_lasso(), lam)
    if kind == "svm":
        return HingeSVM(dataset.for_svm(), lam)
    raise ValueError(f"unknown problem kind {kind!r}")


def lasso_lambda_max(dataset: Dataset) -> float:
    """Smallest ``lam`` for which ``alpha = 0`` solves the Lasso, ``max_i |2 a_i^T y|``."""
    ds = dataset.for_lasso()
    return float(np.abs(2.0 * ds.matrix.rmatvec(ds.targets)).max(initial=0.0))
