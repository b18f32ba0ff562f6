"""CSV traces, epochs-to-gap summaries and experiment orchestration."""
from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .datasets import (DataError, Dataset, load_libsvm, normalize_columns, subsample,
                       synthetic_lasso, synthetic_svm)
from .problems import make_problem
from .sampling import SamplingScheme
from .solver import NumericalAbort, RunResult, SolverConfig, run

SCHEMA_VERSION = 1
TRACE_COLUMNS = ("epoch", "iterations", "vector_ops", "dual_obj", "primal_obj", "gap",
                 "suboptimality", "support_size")
THEORY_COLUMNS = ("F_t", "chi_G", "chi_F")
NOT_REACHED = "not_reached"


def fmt(x) -> str:
    """Deterministic cell text: shortest round-trip floats, empty for missing."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# -- traces ---------------------------------------------------------------

def trace_columns(theory: bool = False) -> tuple:
    return TRACE_COLUMNS + (THEORY_COLUMNS if theory else ())


def trace_csv(trace, theory: bool = False) -> str:
    """Render a trace with a schema comment line and a header."""
    cols = trace_columns(theory)
    buf = io.StringIO()
    buf.write(f"# adacd trace schema={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for rec in trace:
        w.writerow([fmt(getattr(rec, c)) for c in cols])
    return buf.getvalue()


def write_trace(trace, path, theory: bool = False) -> None:
    Path(path).write_text(trace_csv(trace, theory))


def read_trace(path) -> list[dict]:
    """Parse a trace CSV back into dicts of floats (``None`` for empty cells)."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append({k: (float(v) if v != "" else None) for k, v in row.items()})
    return out


# -- epochs to gap --------------------------------------------------------

def epochs_to_gap(trace, eps: float) -> float | None:
    """Epoch of the first checkpoint with gap at or below ``eps``; ``None`` if never."""
    for rec in trace:
        if rec.gap <= eps:
            return rec.epoch
    return None


def interpolated_epochs_to_gap(trace, eps: float) -> float | None:
    """Like :func:`epochs_to_gap` but linear in ``log(gap)`` between checkpoints."""
    prev = None
    for rec in trace:
        if rec.gap <= eps:
            if prev is None or rec.gap <= 0.0 or prev.gap <= 0.0:
                return rec.epoch
            l0, l1, le = math.log(prev.gap), math.log(rec.gap), math.log(eps)
            if l0 == l1:
                return rec.epoch
            frac = (l0 - le) / (l0 - l1)
            return prev.epoch + frac * (rec.epoch - prev.epoch)
        prev = rec
    return None


@dataclass
class SummaryRow:
    scheme: str
    seed: str                      # seed number, or "median" / "mean"
    epochs_to_gap: dict = field(default_factory=dict)   # eps -> epochs or None
    final_gap: float | None = None
    final_suboptimality: float | None = None
    vector_ops: float | None = None
    termination: str = ""
    error: str = ""


def summary_row(scheme: str, seed: int, result: RunResult, eps_list) -> SummaryRow:
    last = result.final
    return SummaryRow(str(scheme), str(seed),
                      {e: epochs_to_gap(result.trace, e) for e in eps_list},
                      last.gap, last.suboptimality, last.vector_ops, result.termination.value)


def aggregate(scheme: str, results, eps_list) -> list[SummaryRow]:
    """Median and mean rows over seeds using interpolated epochs-to-gap.

    An unreached tolerance counts as infinite, so the median can still be
    finite when most seeds reach it; the mean is "not reached" if any seed
    misses.
    """
    ok = [r for r in results if r is not None]
    rows = []
    for label, reduce in (("median", statistics.median), ("mean", statistics.fmean)):
        row = SummaryRow(scheme, label)
        if not ok:
            row.error = "all runs failed"
            rows.append(row)
            continue
        for e in eps_list:
            vals = [interpolated_epochs_to_gap(r.trace, e) for r in ok]
            v = reduce([math.inf if x is None else x for x in vals])
            row.epochs_to_gap[e] = None if math.isinf(v) else v
        row.final_gap = reduce([r.final.gap for r in ok])
        subs = [r.final.suboptimality for r in ok]
        row.final_suboptimality = None if None in subs else reduce(subs)
        row.vector_ops = reduce([r.final.vector_ops for r in ok])
        rows.append(row)
    return rows


def summary_csv(rows, eps_list) -> str:
    buf = io.StringIO()
    buf.write(f"# adacd summary schema={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scheme", "seed"] + [f"epochs_to_gap_{e:g}" for e in eps_list]
               + ["final_gap", "final_suboptimality", "vector_ops", "termination", "error"])
    for r in rows:
        e2g = []
        for e in eps_list:
            v = r.epochs_to_gap.get(e)
            e2g.append(NOT_REACHED if v is None and not r.error else fmt(v))
        w.writerow([r.scheme, r.seed] + e2g + [fmt(r.final_gap), fmt(r.final_suboptimality),
                                               fmt(r.vector_ops), r.termination, r.error])
    return buf.getvalue()


# -- experiments ----------------------------------------------------------

@dataclass
class ExperimentSpec:
    problem: str
    lam: float
    schemes: list
    seeds: list
    data: str | None = None
    synthetic: tuple | None = None
    max_epochs: float = 100
    gap_tol: float = 0.0
    normalize: bool = False
    out: str | None = None
    record_theory: bool = False
    sigma: float = 0.5
    eps_list: tuple = (1e-1, 1e-2, 1e-3)
    norm_spread: float = 0.0
    data_seed: int = 0
    subsample: tuple | None = None
    reference: bool = False
    ref_tol: float = 1e-12
    ref_epochs: int = 2000

    def __post_init__(self):
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if (self.data is None) == (self.synthetic is None):
            raise ValueError("give exactly one of a data path or a synthetic spec")
        self.schemes = [SamplingScheme(s, self.sigma).variant for s in self.schemes]


def load_dataset(spec: ExperimentSpec) -> Dataset:
    """Dataset named by ``spec``, reoriented and normalized for its problem."""
    if spec.data is not None:
        ds = load_libsvm(spec.data)
        if spec.subsample is not None:
            rows, cols, seed = spec.subsample
            # subsampling is expressed in (datapoints, features)
            ds = subsample(ds, cols, rows, seed)
    else:
        d, n, a, b = spec.synthetic
        if spec.problem == "lasso":
            ds = synthetic_lasso(int(d), int(n), a, b, spec.data_seed,
                                 norm_spread=spec.norm_spread)
        else:
            ds = synthetic_svm(int(d), int(n), a, b, spec.data_seed)
    ds = ds.for_lasso() if spec.problem == "lasso" else ds.for_svm()
    if ds.n == 0:
        raise DataError("dataset has no coordinates")
    if spec.normalize:
        ds = normalize_columns(ds, "unit_l2")
    return ds


@dataclass
class RunOutcome:
    scheme: str
    seed: int
    result: RunResult | None
    error: str = ""


@dataclass
class Comparison:
    outcomes: list
    rows: list
    reference: analysis.ReferenceSolution | None
    n: int


def compare(spec: ExperimentSpec, dataset: Dataset | None = None) -> Comparison:
    """Run every (scheme, seed) pair against one shared reference solution."""
    ds = load_dataset(spec) if dataset is None else dataset
    problem = make_problem(spec.problem, ds, spec.lam)
    ref = None
    if spec.reference:
        ref = analysis.reference_solution(problem, target_gap=spec.ref_tol,
                                          max_epochs=spec.ref_epochs)
    outcomes, rows = [], []
    for scheme in spec.schemes:
        per_scheme = []
        for seed in spec.seeds:
            cfg = SolverConfig(SamplingScheme(scheme, spec.sigma), max_epochs=spec.max_epochs,
                               gap_tol=spec.gap_tol, seed=seed,
                               record_theory=spec.record_theory,
                               suboptimality_ref=None if ref is None else ref.dual_obj)
            try:
                res = run(problem, cfg)
            except (NumericalAbort, FloatingPointError, ValueError) as exc:
                outcomes.append(RunOutcome(scheme, seed, None, f"{type(exc).__name__}: {exc}"))
                rows.append(SummaryRow(scheme, str(seed), error=outcomes[-1].error))
                per_scheme.append(None)
                continue
            outcomes.append(RunOutcome(scheme, seed, res))
            rows.append(summary_row(scheme, seed, res, spec.eps_list))
            per_scheme.append(res)
        rows.extend(aggregate(scheme, per_scheme, spec.eps_list))
    return Comparison(outcomes, rows, ref, problem.n)


# -- cost benchmark -------------------------------------------------------

BENCH_COLUMNS = ("scheme", "refresh", "cost_class", "epochs", "refreshes_per_epoch",
                 "refresh_ops_per_epoch", "update_ops_per_epoch", "full_pass_ops",
                 "refresh_passes_per_epoch")


def bench(problem, schemes, epochs: int = 2, seed: int = 0, sigma: float = 0.5) -> list[dict]:
    """Measured column-op costs per epoch for each scheme.

    A full pass (all margins ``a_i^T w``) costs ``n`` column-ops; the
    ``refresh_passes_per_epoch`` column expresses refresh cost in those units.
    Startup refreshes of static schemes are excluded.
    """
    n = problem.n
    table = []
    for s in schemes:
        scheme = SamplingScheme(s, sigma)
        res = run(problem, SolverConfig(scheme, max_epochs=epochs, seed=seed))
        ep = res.final.iterations / n if n else 0.0
        refreshes = res.refresh_count - (1 if scheme.refresh == "static" else 0)
        table.append({
            "scheme": scheme.variant,
            "refresh": scheme.refresh,
            "cost_class": scheme.cost_class,
            "epochs": ep,
            "refreshes_per_epoch": refreshes / ep if ep else 0.0,
            "refresh_ops_per_epoch": res.refresh_ops.column_ops / ep if ep else 0.0,
            "update_ops_per_epoch": res.update_ops.column_ops / ep if ep else 0.0,
            "full_pass_ops": n,
            "refresh_passes_per_epoch": res.refresh_ops.column_ops / (ep * n) if ep else 0.0,
        })
    return table


def bench_csv(table) -> str:
    buf = io.StringIO()
    buf.write(f"# adacd bench schema={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for row in table:
        w.writerow([fmt(row[c]) for c in BENCH_COLUMNS])
    return buf.getvalue()
