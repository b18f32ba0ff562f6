"""Randomized coordinate descent with scheme-driven sampling.

Each iteration samples a coordinate, takes the exact one-dimensional
minimizing step on it and updates the primal vector incrementally.  The
sampling distribution is rebuilt once, once per epoch, or every iteration
depending on the scheme.  Checkpoints recompute ``w`` from scratch and emit a
:class:`TraceRecord`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .linalg import OpCounter
from .problems import Problem, PrimalDualState
from .sampling import (PER_EPOCH, PER_ITERATION, Converged, ProbabilityVector,
                       SamplingScheme, SumTree, build_distribution, is_coherent, make_rng,
                       support_set)


class Termination(str, enum.Enum):
    BUDGET = "BudgetExhausted"
    GAP = "GapTolReached"
    SUPPORT = "SupportEmpty"


class NumericalAbort(RuntimeError):
    """Objective became non-finite; ``state`` holds the offending iterate."""

    def __init__(self, msg, state=None, t=None):
        super().__init__(msg)
        self.state = state
        self.t = t


class InvariantViolation(AssertionError):
    pass


@dataclass
class SolverConfig:
    scheme: SamplingScheme
    max_epochs: float = 100
    gap_tol: float = 0.0
    seed: int = 0
    trace_every: int | None = None   # iterations between checkpoints; default n
    record_theory: bool = False
    suboptimality_ref: float | None = None

    def __post_init__(self):
        if isinstance(self.scheme, str):
            self.scheme = SamplingScheme(self.scheme)
        if not self.max_epochs > 0:
            raise ValueError("max_epochs must be positive")
        if not self.gap_tol >= 0:
            raise ValueError("gap_tol must be nonnegative")
        if self.trace_every is not None and self.trace_every < 1:
            raise ValueError("trace_every must be at least 1")


@dataclass
class TraceRecord:
    epoch: float
    iterations: int
    vector_ops: int
    dual_obj: float
    primal_obj: float
    gap: float
    suboptimality: float | None
    support_size: int
    drift: float = 0.0
    F_t: float | None = None
    F_t_gap: float | None = None
    chi_G: float | None = None
    chi_F: float | None = None
    p_min: float | None = None


@dataclass
class TheoryLog:
    """Per-iteration audit results collected when ``record_theory`` is on."""

    checked: int = 0
    monotone_violations: list = field(default_factory=list)
    descent_violations: list = field(default_factory=list)
    kappa_violations: list = field(default_factory=list)
    coherence_violations: list = field(default_factory=list)
    min_descent_margin: float = math.inf

    @property
    def clean(self) -> bool:
        return not (self.monotone_violations or self.descent_violations
                    or self.kappa_violations or self.coherence_violations)


@dataclass
class RunResult:
    state: PrimalDualState
    trace: list
    termination: Termination
    update_ops: OpCounter
    refresh_ops: OpCounter
    refresh_count: int
    theory: TheoryLog | None = None

    @property
    def final(self) -> TraceRecord:
        return self.trace[-1]


class _Run:
    def __init__(self, problem: Problem, config: SolverConfig):
        self.p = problem
        self.cfg = config
        self.scheme = config.scheme
        self.n = problem.n
        self.active = problem.active
        self.state = problem.initial_state()
        self.update_ops = OpCounter()
        self.refresh_ops = OpCounter()
        self.refresh_count = 0
        self.dist: ProbabilityVector | None = None
        self.tree: SumTree | None = None
        self.trace: list[TraceRecord] = []
        self.theory = TheoryLog() if config.record_theory else None
        self.last_checkpoint_t = -1

    # distribution --------------------------------------------------------

    def refresh(self):
        """Rebuild the sampling distribution from the current iterate.

        Returns the full gap vector when the scheme computed it.
        """
        p, s = self.p, self.scheme
        self.refresh_count += 1
        kappa = gaps = None
        if s.needs != "none":
            c = p.margins(self.state.w, self.refresh_ops)
            if s.needs == "kappa":
                kappa = p.residuals_from(self.state.alpha, c)[0]
            else:
                gaps = p.gaps_from(self.state.alpha, c)
                if self.theory is not None:
                    kappa = p.residuals_from(self.state.alpha, c)[0]
        self.dist = build_distribution(s, n=self.n, kappa=kappa, gaps=gaps, norms=p.norms,
                                       lipschitz=p.lipschitz, active=self.active)
        self.tree = SumTree(self.dist.weights)
        if self.theory is not None and kappa is not None:
            sup = support_set(kappa, p.norms, self.active)
            if not is_coherent(self.dist, sup):
                self.theory.coherence_violations.append(self.state.t)
        return gaps

    def needs_refresh(self, t: int) -> bool:
        r = self.scheme.refresh
        if r == PER_ITERATION:
            return True
        if r == PER_EPOCH:
            return t % self.n == 0
        return self.dist is None

    # checkpoint ----------------------------------------------------------

    def checkpoint(self) -> TraceRecord:
        p, st = self.p, self.state
        drift = p.recompute(st)
        c = p.margins(st.w)
        gaps = p.gaps_from(st.alpha, c)
        kappa = p.residuals_from(st.alpha, c)[0]
        oa = p.dual_obj(st)
        ob = p.primal_obj_from(st.w, c)
        if not (math.isfinite(oa) and math.isfinite(ob)):
            raise NumericalAbort(f"non-finite objective at iteration {st.t}: "
                                 f"O_A={oa}, O_B={ob}", st.copy(), st.t)
        sup = support_set(kappa, p.norms, self.active)
        ref = self.cfg.suboptimality_ref
        rec = TraceRecord(
            epoch=st.t / self.n if self.n else 0.0,
            iterations=st.t,
            vector_ops=self.update_ops.column_ops + self.refresh_ops.column_ops,
            dual_obj=oa,
            primal_obj=ob,
            gap=oa + ob,
            suboptimality=None if ref is None else oa - ref,
            support_size=int(sup.sum()),
            drift=drift,
        )
        if self.theory is not None:
            self._theory_fields(rec, kappa, gaps, sup)
            bad = analysis.kappa_bound_check(p, st)
            if bad:
                self.theory.kappa_violations.append((st.t, bad))
        self.trace.append(rec)
        self.last_checkpoint_t = st.t
        return rec

    def _theory_fields(self, rec, kappa, gaps, sup):
        p = self.p
        dist = self._distribution_at_checkpoint(kappa, gaps)
        if dist is None:
            rec.F_t, rec.p_min = 0.0, math.nan
        else:
            try:
                rec.F_t = analysis.F_t(kappa, p.norms_sq, dist, p.beta, support=sup)
            except analysis.IncoherentDistribution:
                rec.F_t = math.inf
            probs = dist.probabilities[sup]
            rec.p_min = float(probs.min()) if probs.size else math.nan
        g = analysis.F_t_gap(np.where(sup, kappa, 0.0), p.norms_sq, gaps, p.beta)
        rec.F_t_gap, rec.chi_G, rec.chi_F = g["F_t_gap"], g["chi_G"], g["chi_F"]

    def _distribution_at_checkpoint(self, kappa, gaps):
        s = self.scheme
        fresh = s.refresh == PER_ITERATION or (
            s.refresh == PER_EPOCH and self.state.t % self.n == 0) or self.dist is None
        if not fresh:
            return self.dist
        try:
            return build_distribution(s, n=self.n, kappa=kappa, gaps=gaps, norms=self.p.norms,
                                      lipschitz=self.p.lipschitz, active=self.active)
        except Converged:
            return None

    def _checkpoint_once(self) -> TraceRecord:
        if self.last_checkpoint_t == self.state.t:
            return self.trace[-1]
        return self.checkpoint()

    def stop_reason(self, rec: TraceRecord) -> Termination | None:
        if rec.support_size == 0:
            return Termination.SUPPORT
        if rec.gap <= self.cfg.gap_tol:
            return Termination.GAP
        return None

    # main loop -----------------------------------------------------------

    def run(self) -> RunResult:
        p, st, cfg = self.p, self.state, self.cfg
        every = cfg.trace_every or max(self.n, 1)
        budget = int(round(cfg.max_epochs * self.n))
        rng = make_rng(cfg.seed)
        theory = self.theory

        termination = self.stop_reason(self.checkpoint())
        while termination is None and st.t < budget:
            if self.needs_refresh(st.t):
                try:
                    gaps = self.refresh()
                except Converged:
                    termination = self.stop_reason(self._checkpoint_once()) or Termination.SUPPORT
                    break
                if gaps is not None and gaps.sum() <= cfg.gap_tol:
                    termination = self.stop_reason(self._checkpoint_once())
                    if termination is not None:
                        break
            i = self.tree.sample(rng.random())
            if theory is not None:
                before = st.copy()
            delta = p.coordinate_update(st, i, self.update_ops)
            p.apply_update(st, i, delta, self.update_ops)
            if theory is not None:
                self._audit_step(before, i)
            if st.t % every == 0:
                termination = self.stop_reason(self.checkpoint())
        rec = self._checkpoint_once()
        termination = termination or self.stop_reason(rec)
        if termination is None:
            termination = Termination.BUDGET
        return RunResult(st, self.trace, termination, self.update_ops, self.refresh_ops,
                         self.refresh_count, theory)

    def _audit_step(self, before: PrimalDualState, i: int):
        p, st, th = self.p, self.state, self.theory
        th.checked += 1
        oa0, oa1 = p.dual_obj(before), p.dual_obj(st)
        if oa1 > oa0 + 1e-12:
            th.monotone_violations.append((before.t, i, oa1 - oa0))
        chk = analysis.descent_inequality_check(
            oa0 - oa1, p.coordinate_gap(before, i), p.dual_residual(before, i, rtol=0.0)[0],
            p.norms_sq[i], p.beta, p.strong_convexity[i])
        th.min_descent_margin = min(th.min_descent_margin, chk.margin)
        if not chk.passed:
            th.descent_violations.append((before.t, i, chk.worst_s, chk.margin))
        if p.kind == "lasso" and abs(st.alpha[i]) > p.radius * (1 + 1e-12):
            raise InvariantViolation(f"|alpha_{i}| = {abs(st.alpha[i])} left the ball of "
                                     f"radius {p.radius}")
        if p.kind == "svm":
            ay = st.alpha[i] * p.y[i]
            if ay < -1e-12 or ay > 1 + 1e-12:
                raise InvariantViolation(f"alpha_{i} y_{i} = {ay} outside [0, 1]")


def run(problem: Problem, config: SolverConfig) -> RunResult:
    """Run coordinate descent on ``problem`` until budget, tolerance or convergence."""
    return _Run(problem, config).run()
