"""Theory quantities as executable checks.

Nonuniformity measure, the per-state constants that drive the rate bounds,
the bound formulas themselves, one-coordinate descent and residual-bound
verifiers, and a high-accuracy reference solution for suboptimality curves.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from .sampling import ProbabilityVector

log = logging.getLogger(__name__)

S_GRID = tuple(k / 10 for k in range(11))


class IncoherentDistribution(ValueError):
    def __init__(self, index: int):
        super().__init__(f"distribution gives zero probability to support coordinate {index}")
        self.index = index


def chi(x) -> float:
    """Nonuniformity ``sqrt(1 + n^2 Var[x / ||x||_1])`` with population variance.

    Evaluated through the equivalent ``chi^2 = n ||x||_2^2 / ||x||_1^2`` in exact
    integer arithmetic and rounded once, so the uniform vector gives exactly 1
    and a single spike exactly ``sqrt(n)``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("chi needs a finite nonnegative vector")
    if not x.sum() > 0:
        raise ValueError("chi is undefined for the zero vector")
    # every double is an integer over a power of two; bring them to a common denominator
    ratios = [v.as_integer_ratio() for v in x.tolist()]
    den = max(d for _, d in ratios)
    ints = [a * (den // d) for a, d in ratios]
    s1 = sum(ints)
    s2 = sum(i * i for i in ints)
    return math.sqrt(Fraction(x.size * s2, s1 * s1))


def F_t(kappa, norms_sq, p, beta: float, n: int | None = None, support=None,
        mu=None, theta: float | None = None) -> float:
    """Residual term of the per-iteration progress bound.

    With all ``mu_i = 0`` this is ``(1/(n^2 beta)) sum_{i in I} kappa_i^2 ||a_i||^2 / p_i``.
    The general form with strong convexity ``mu`` needs ``theta`` in
    ``[0, min_{i in I} p_i]``.
    """
    kappa = np.asarray(kappa, dtype=np.float64)
    norms_sq = np.asarray(norms_sq, dtype=np.float64)
    probs = p.probabilities if isinstance(p, ProbabilityVector) else np.asarray(p, dtype=np.float64)
    n = kappa.size if n is None else n
    sup = (kappa != 0.0) if support is None else np.asarray(support, dtype=bool)
    idx = np.flatnonzero(sup)
    if idx.size == 0:
        return 0.0
    bad = idx[probs[idx] <= 0.0]
    if bad.size:
        raise IncoherentDistribution(int(bad[0]))
    k2 = kappa[idx] ** 2
    if mu is None or not np.any(np.asarray(mu)[idx]):
        return float(np.sum(k2 * norms_sq[idx] / probs[idx])) / (n * n * beta)
    mu = np.asarray(mu, dtype=np.float64)[idx]
    if theta is None or not 0.0 < theta <= probs[idx].min():
        raise ValueError("theta must lie in (0, min_I p_i] for the strongly convex form")
    terms = (theta * (mu * beta + norms_sq[idx]) / probs[idx] - mu * beta) * k2
    return float(terms.sum()) / (n * n * beta * theta)


def F_t_gap(kappa, norms_sq, gaps, beta: float) -> dict:
    """Gap-sampling counterpart of :func:`F_t` with its two nonuniformity factors.

    Returns ``{"F_t_gap", "chi_G", "chi_F"}``.  ``F_t_gap`` is NaN once the
    gap (or the residual vector) is zero.
    """
    kappa = np.asarray(kappa, dtype=np.float64)
    fvec = np.asarray(norms_sq, dtype=np.float64) * kappa ** 2
    gvec = np.maximum(np.asarray(gaps, dtype=np.float64), 0.0)
    n = kappa.size
    if not gvec.sum() > 0:
        return {"F_t_gap": math.nan, "chi_G": math.nan,
                "chi_F": chi(fvec) if fvec.sum() > 0 else math.nan}
    cg = chi(gvec)
    if not fvec.sum() > 0:
        return {"F_t_gap": 0.0, "chi_G": cg, "chi_F": math.nan}
    cf = chi(fvec)
    value = cf / (n * beta * cg ** 3) * float(fvec.sum())
    return {"F_t_gap": value, "chi_G": cg, "chi_F": cf}


@dataclass
class RateBounds:
    F_circ: float
    p_min: float
    eps: float
    eps_A0: float
    n: int
    T: float
    T0: float

    def rate_rhs(self, t):
        return theorem1_rate(self.F_circ, self.p_min, self.eps_A0, self.n, t)


def theorem1_rate(F_circ, p_min, eps_A0, n, t):
    """Expected-suboptimality bound ``(2 F n^2 + 2 eps0/p_min) / (2/p_min + t)``."""
    t = np.asarray(t, dtype=np.float64)
    out = (2.0 * F_circ * n * n + 2.0 * eps_A0 / p_min) / (2.0 / p_min + t)
    return float(out) if out.ndim == 0 else out


def theorem1_bounds(F_circ: float, p_min: float, eps: float, eps_A0: float, n: int) -> RateBounds:
    """Iteration counts ``T`` (gap <= eps) and ``T0`` (suboptimality <= eps/2)."""
    if min(F_circ, p_min, eps, eps_A0) <= 0 or n <= 0:
        raise ValueError("all inputs must be positive")
    t0 = max(0.0, (1.0 / p_min) * math.log(2.0 * eps_A0 / (n * n * p_min * F_circ)))
    T = t0 + 5.0 * F_circ * n * n / eps - 1.0 / p_min
    T0 = t0 + 4.0 * F_circ * n * n / eps - 2.0 / p_min
    return RateBounds(F_circ, p_min, eps, eps_A0, n, T, T0)


def theorem2_rate(F_circ_g, eps_A0, n, t):
    """Gap-sampling bound ``(2 F_g n^2 + 2 n eps0) / (t + 2 n)``."""
    t = np.asarray(t, dtype=np.float64)
    out = (2.0 * F_circ_g * n * n + 2.0 * n * eps_A0) / (t + 2.0 * n)
    return float(out) if out.ndim == 0 else out


def mixed_iteration_bound(F_ada: float, eps: float, eps_A0: float, n: int, m: int,
                          sigma: float) -> float:
    """Post hoc iteration bound for the sigma-mixture, with ``m = max_t m_t``."""
    return 5 * F_ada * n * n / (eps * (1 - sigma)) + 5 * eps_A0 * m / (eps * sigma)


# -- verifiers ------------------------------------------------------------

@dataclass
class DescentCheck:
    passed: bool
    margin: float        # decrease minus the largest right-hand side
    worst_s: float
    rhs: float


def descent_inequality_check(decrease: float, gap_i: float, kappa_i: float,
                             norm_sq_i: float, beta: float, mu_i: float = 0.0,
                             s_grid=S_GRID, slack: float = 1e-10) -> DescentCheck:
    """One-coordinate progress inequality for an exact coordinate step.

    Checks ``decrease >= s [G_i + (mu_i/2)(1-s) kappa_i^2 - (s/(2 beta)) ||a_i||^2 kappa_i^2]``
    for every ``s`` in ``s_grid``.
    """
    k2 = kappa_i * kappa_i
    best, best_s = -math.inf, 0.0
    for s in s_grid:
        rhs = s * (gap_i + 0.5 * mu_i * (1 - s) * k2 - s / (2 * beta) * norm_sq_i * k2)
        if rhs > best:
            best, best_s = rhs, s
    margin = decrease - best
    return DescentCheck(margin >= -slack, margin, best_s, best)


def descent_inequality_check_states(problem, before, i: int, after, s_grid=S_GRID,
                                    slack: float = 1e-10) -> DescentCheck:
    """State-level wrapper: evaluates objectives, ``G_i`` and exact ``kappa_i``."""
    decrease = problem.dual_obj(before) - problem.dual_obj(after)
    gap_i = problem.coordinate_gap(before, i)
    kappa_i, _ = problem.dual_residual(before, i, rtol=0.0)
    return descent_inequality_check(decrease, gap_i, kappa_i, problem.norms_sq[i],
                                    problem.beta, problem.strong_convexity[i], s_grid, slack)


def kappa_bound_check(problem, state, slack: float = 1e-12) -> list[int]:
    """Coordinates violating ``kappa_i <= 2 L_i`` (empty list means pass)."""
    kappa = problem.residuals(state, rtol=0.0)
    return np.flatnonzero(kappa > 2.0 * problem.lipschitz + slack).tolist()


# -- reference solution ---------------------------------------------------

@dataclass
class ReferenceSolution:
    alpha: np.ndarray
    dual_obj: float
    gap: float
    reached: bool
    epochs: float


def reference_solution(problem, target_gap: float = 1e-12, max_epochs: int = 5000,
                       seed: int = 0, check_every: int = 10) -> ReferenceSolution:
    """Run uniform coordinate descent until the duality gap is below ``target_gap``.

    The returned objective carries its certificate: the true optimum lies in
    ``[dual_obj - gap, dual_obj]``.  If the budget runs out the best iterate is
    returned with ``reached=False`` and a warning.
    """
    from .sampling import SamplingScheme
    from .solver import SolverConfig, Termination, run

    if not target_gap > 0:
        raise ValueError("target_gap must be positive")
    cfg = SolverConfig(SamplingScheme("uniform"), max_epochs=max_epochs, gap_tol=target_gap,
                       seed=seed, trace_every=max(problem.n, 1) * check_every)
    res = run(problem, cfg)
    last = res.trace[-1]
    reached = res.termination in (Termination.GAP, Termination.SUPPORT) or last.gap <= target_gap
    if not reached:
        log.warning("reference solution stopped at gap %.3e > %.1e", last.gap, target_gap)
    return ReferenceSolution(res.state.alpha.copy(), last.dual_obj, last.gap, reached,
                             last.epoch)


# -- run-level report -----------------------------------------------------

@dataclass
class TheoryReport:
    n: int
    F_t: list = field(default_factory=list)
    F_t_gap: list = field(default_factory=list)
    chi_G: list = field(default_factory=list)
    chi_F: list = field(default_factory=list)
    p_min: list = field(default_factory=list)
    support_size: list = field(default_factory=list)
    F_circ_mean: float = math.nan
    F_circ_max: float = math.nan
    F_circ_g_max: float = math.nan

    @classmethod
    def from_trace(cls, trace, n: int) -> "TheoryReport":
        rep = cls(n)
        for r in trace:
            rep.F_t.append(r.F_t)
            rep.F_t_gap.append(r.F_t_gap)
            rep.chi_G.append(r.chi_G)
            rep.chi_F.append(r.chi_F)
            rep.p_min.append(r.p_min)
            rep.support_size.append(r.support_size)
        ft = np.array([x for x in rep.F_t if x is not None and np.isfinite(x)])
        fg = np.array([x for x in rep.F_t_gap if x is not None and np.isfinite(x)])
        if ft.size:
            rep.F_circ_mean = float(ft.mean())
            rep.F_circ_max = float(ft.max())
        if fg.size:
            rep.F_circ_g_max = float(fg.max())
        return rep
