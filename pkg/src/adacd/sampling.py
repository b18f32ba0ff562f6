"""Coordinate-sampling distributions and an O(log n) sum-tree sampler."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VARIANTS = (
    "uniform",
    "supportset_uniform",
    "adaptive",
    "ada_uniform",
    "importance",
    "ada_gap",
    "gap_per_epoch",
)

STATIC, PER_EPOCH, PER_ITERATION = "static", "per_epoch", "per_iteration"

_ALIASES = {
    "supportset-uniform": "supportset_uniform",
    "supportset": "supportset_uniform",
    "ada-uniform": "ada_uniform",
    "ada-gap": "ada_gap",
    "gap-per-epoch": "gap_per_epoch",
}

# weights below this fraction of the largest weight are treated as exact zeros
FLUSH_RTOL = 1e-14


class Converged(Exception):
    """Every sampling weight vanished: the support set is empty."""


@dataclass(frozen=True)
class SamplingScheme:
    variant: str
    sigma: float = 0.5

    def __post_init__(self):
        v = _ALIASES.get(self.variant, self.variant)
        if v not in VARIANTS:
            raise ValueError(f"unknown sampling scheme {self.variant!r}; choose from {VARIANTS}")
        object.__setattr__(self, "variant", v)
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("sigma must lie in [0, 1]")

    @property
    def refresh(self) -> str:
        if self.variant in ("uniform", "importance"):
            return STATIC
        if self.variant == "gap_per_epoch":
            return PER_EPOCH
        return PER_ITERATION

    @property
    def needs(self) -> str:
        """Which per-coordinate vector the weights are built from."""
        if self.variant in ("ada_gap", "gap_per_epoch"):
            return "gap"
        if self.variant in ("supportset_uniform", "adaptive", "ada_uniform"):
            return "kappa"
        return "none"

    @property
    def cost_class(self) -> str:
        return "O(n*nnz)" if self.refresh == PER_ITERATION else "O(nnz)"

    def __str__(self):
        return self.variant


class ProbabilityVector:
    """Nonnegative weights with a cached positive total."""

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a finite nonnegative vector")
        total = float(w.sum())
        if total <= 0.0:
            raise Converged("all sampling weights are zero")
        self.weights = w
        self.total = total

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.total

    @property
    def n(self) -> int:
        return self.weights.size

    def __len__(self):
        return self.weights.size


def flush(x: np.ndarray, rtol: float = FLUSH_RTOL) -> np.ndarray:
    """Clip negatives and zero out entries below ``rtol * max(x)``."""
    x = np.maximum(np.asarray(x, dtype=np.float64), 0.0)
    top = x.max(initial=0.0)
    if top > 0.0:
        x = np.where(x < rtol * top, 0.0, x)
    return x


def residual_weights(kappa, norms) -> np.ndarray:
    """``|kappa_i| * ||a_i||`` after flushing; its support is the support set."""
    return flush(np.abs(kappa) * norms)


def build_distribution(scheme: SamplingScheme, *, n: int | None = None, kappa=None,
                       gaps=None, norms=None, lipschitz=None, active=None) -> ProbabilityVector:
    """Weights for ``scheme`` from the per-coordinate inputs it needs.

    ``norms`` are column norms, ``active`` masks out coordinates that can never
    move (zero columns).  Raises :class:`Converged` when all weights vanish.
    """
    v = scheme.variant
    if n is None:
        for x in (kappa, gaps, norms, lipschitz, active):
            if x is not None:
                n = len(x)
                break
    mask = np.ones(n, dtype=bool) if active is None else np.asarray(active, dtype=bool)

    if v == "uniform":
        w = mask.astype(np.float64)
    elif v == "importance":
        w = np.asarray(lipschitz, dtype=np.float64) * np.asarray(norms, dtype=np.float64)
        w = np.where(mask, w, 0.0)
    elif v in ("ada_gap", "gap_per_epoch"):
        w = np.where(mask, flush(gaps), 0.0)
    else:
        x = np.where(mask, residual_weights(kappa, norms), 0.0)
        support = x > 0.0
        m = int(support.sum())
        if m == 0:
            raise Converged("support set is empty")
        if v == "supportset_uniform":
            w = support.astype(np.float64)
        elif v == "adaptive":
            w = x
        else:
            w = np.where(support, scheme.sigma / m + (1.0 - scheme.sigma) * x / x.sum(), 0.0)
    return ProbabilityVector(w)


def support_set(kappa, norms, active=None) -> np.ndarray:
    x = residual_weights(kappa, norms)
    if active is not None:
        x = np.where(active, x, 0.0)
    return x > 0.0


def is_coherent(p: ProbabilityVector, support) -> bool:
    return bool(np.all(p.weights[np.asarray(support, dtype=bool)] > 0.0))


# -- sampling -------------------------------------------------------------

def linear_scan_sample(weights, u: float) -> int:
    """Reference prefix-scan: the ``i`` with ``cum_i <= u*total < cum_{i+1}``."""
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    total = 0.0
    for x in weights:
        total += x
    if total <= 0.0:
        raise ValueError("cannot sample from zero total weight")
    target = u * total
    cum = 0.0
    last = -1
    for i, x in enumerate(weights):
        if x > 0.0:
            last = i
            if target < cum + x:
                return i
        cum += x
    return last


class SumTree:
    """Complete binary tree of partial sums over ``n`` leaf weights.

    ``touches`` counts tree nodes read or written by :meth:`update` and
    :meth:`sample`, for auditing the logarithmic cost.
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a finite nonnegative vector")
        self.n = w.size
        cap = 1
        while cap < max(self.n, 1):
            cap *= 2
        self.capacity = cap
        tree = np.zeros(2 * cap)
        tree[cap:cap + self.n] = w
        lo = cap
        while lo > 1:
            hi, lo = lo, lo // 2
            tree[lo:hi] = tree[2 * lo:2 * hi:2] + tree[2 * lo + 1:2 * hi:2]
        self.tree = tree.tolist()  # scalar access on lists is much cheaper
        self.touches = 0

    @property
    def total(self) -> float:
        return float(self.tree[1])

    def weight(self, i: int) -> float:
        return float(self.tree[self.capacity + i])

    @property
    def weights(self) -> np.ndarray:
        return np.array(self.tree[self.capacity:self.capacity + self.n])

    def update(self, i: int, weight: float) -> None:
        if not 0 <= i < self.n:
            raise IndexError(i)
        if weight < 0 or not np.isfinite(weight):
            raise ValueError("weight must be finite and nonnegative")
        tree = self.tree
        node = self.capacity + i
        tree[node] = weight
        touched = 1
        node //= 2
        while node >= 1:
            tree[node] = tree[2 * node] + tree[2 * node + 1]
            touched += 1
            node //= 2
        self.touches += touched

    def sample(self, u: float) -> int:
        """Leaf selected by ``u`` under the half-open prefix rule (ties go right)."""
        if not 0.0 <= u < 1.0:
            raise ValueError("u must lie in [0, 1)")
        tree = self.tree
        total = tree[1]
        if total <= 0.0:
            raise ValueError("cannot sample from zero total weight")
        target = u * total
        node, base, cap = 1, 0.0, self.capacity
        touched = 1
        while node < cap:
            left = 2 * node
            lw = tree[left]
            if target < base + lw:
                node = left
            else:
                base += lw
                node = left + 1
            touched += 1
        self.touches += touched
        i = node - cap
        if i >= self.n or tree[node] == 0.0:
            # rounding pushed the target past the last positive leaf
            i = max(j for j in range(self.n) if tree[cap + j] > 0.0)
        return i


class Sampler:
    """Draws coordinates from a distribution with one uniform variate per draw."""

    def __init__(self, dist: ProbabilityVector):
        self.dist = dist
        self.tree = SumTree(dist.weights)

    def sample(self, rng: np.random.Generator) -> int:
        return self.tree.sample(rng.random())


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
