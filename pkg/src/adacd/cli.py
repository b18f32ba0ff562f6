"""Command-line front end: ``adacd solve | compare | bench | stats``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical abort.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import report
from .datasets import DataError
from .problems import lasso_lambda_max, make_problem
from .sampling import VARIANTS, SamplingScheme
from .solver import InvariantViolation, NumericalAbort, SolverConfig, run

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("adacd")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str, count: int | None = None) -> tuple:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"expected {count} comma-separated values")
    return vals


def _seeds(text: str) -> list[int]:
    """``0,1,2`` or ``0-4`` (inclusive) or a mix."""
    out = []
    try:
        for part in text.split(","):
            if "-" in part[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}")
    return out


def _schemes(text: str) -> list[str]:
    if text == "all":
        return list(VARIANTS)
    names = [s.strip() for s in text.split(",") if s.strip()]
    for s in names:
        try:
            SamplingScheme(s)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    return names


def _add_common(p: argparse.ArgumentParser, multi: bool):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", metavar="PATH", help="LIBSVM file")
    src.add_argument("--synthetic", metavar="d,n,a,b", type=lambda s: _floats(s, 4),
                     help="lasso: d,n,support_frac,noise; svm: d,n,density,label_flip")
    p.add_argument("--problem", choices=("lasso", "svm"), required=True)
    lam = p.add_mutually_exclusive_group(required=True)
    lam.add_argument("--lambda", dest="lam", type=float, help="regularization strength")
    lam.add_argument("--lambda-frac", type=float,
                     help="lasso only: lambda as a fraction of the smallest all-zero lambda")
    p.add_argument("--scheme", type=_schemes, default=["uniform"],
                   help="scheme name%s (%s)" % ("s, comma separated, or 'all'" if multi else "",
                                                ", ".join(VARIANTS)))
    p.add_argument("--sigma", type=float, default=0.5, help="ada_uniform mixing weight")
    p.add_argument("--seeds", type=_seeds, default=[0, 1, 2, 3, 4] if multi else [0])
    p.add_argument("--epochs", type=float, default=100, help="epoch budget")
    p.add_argument("--tol", type=float, default=0.0, help="stop once the duality gap is below")
    p.add_argument("--normalize", action="store_true", help="scale columns to unit norm")
    p.add_argument("--theory", action="store_true", help="log theory columns and audits")
    p.add_argument("--out", metavar="PATH", help="output file (solve, bench) or directory")
    p.add_argument("--norm-spread", type=float, default=0.0,
                   help="synthetic lasso: log-normal spread of column norms")
    p.add_argument("--data-seed", type=int, default=0, help="seed of the synthetic generator")
    p.add_argument("--subsample", type=lambda s: tuple(int(x) for x in _floats(s, 3)),
                   metavar="points,features,seed", help="random subsample of a data file")
    p.add_argument("--reference", action="store_true",
                   help="compute a reference optimum and fill the suboptimality column")
    p.add_argument("--ref-tol", type=float, default=1e-12)
    p.add_argument("--ref-epochs", type=int, default=2000)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adacd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    verbose = argparse.ArgumentParser(add_help=False)
    verbose.add_argument("-v", "--verbose", action="store_true", help="log progress")

    p = sub.add_parser("solve", help="one run, trace CSV", parents=[verbose])
    _add_common(p, multi=False)

    p = sub.add_parser("compare", help="schemes x seeds, summary and per-run traces",
                       parents=[verbose])
    _add_common(p, multi=True)
    p.add_argument("--eps", type=_floats, default=(1e-1, 1e-2, 1e-3),
                   help="gap levels for the epochs-to-gap columns")
    p.add_argument("--figures", action="store_true",
                   help="also render gap/suboptimality PNGs into the output directory")

    p = sub.add_parser("bench", help="measured per-epoch cost of each scheme", parents=[verbose])
    _add_common(p, multi=True)
    p.set_defaults(epochs=2)

    p = sub.add_parser("stats", help="dataset statistics", parents=[verbose])
    p.add_argument("--data", metavar="PATH", required=True)
    return parser


def _spec(args) -> report.ExperimentSpec:
    return report.ExperimentSpec(
        problem=args.problem, lam=args.lam if args.lam is not None else 1.0,
        schemes=args.scheme, seeds=args.seeds, data=args.data, synthetic=args.synthetic,
        max_epochs=args.epochs, gap_tol=args.tol, normalize=args.normalize, out=args.out,
        record_theory=args.theory, sigma=args.sigma, eps_list=getattr(args, "eps", (1e-3,)),
        norm_spread=args.norm_spread, data_seed=args.data_seed, subsample=args.subsample,
        reference=args.reference, ref_tol=args.ref_tol, ref_epochs=args.ref_epochs)


def _prepare(args):
    """Spec, dataset and the resolved lambda."""
    spec = _spec(args)
    ds = report.load_dataset(spec)
    if args.lambda_frac is not None:
        if args.problem != "lasso":
            raise UsageError("--lambda-frac applies to lasso only")
        lmax = lasso_lambda_max(ds)
        if not lmax > 0:
            raise DataError("lambda_max is zero (y is orthogonal to every feature)")
        spec.lam = args.lambda_frac * lmax
        log.info("lambda = %g (%g x lambda_max)", spec.lam, args.lambda_frac)
    if not spec.lam > 0:
        raise UsageError("lambda must be positive")
    return spec, ds


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    if len(args.scheme) != 1 or len(args.seeds) != 1:
        raise UsageError("solve takes exactly one scheme and one seed")
    spec, ds = _prepare(args)
    problem = make_problem(spec.problem, ds, spec.lam)
    ref = None
    if spec.reference:
        from .analysis import reference_solution
        ref = reference_solution(problem, spec.ref_tol, spec.ref_epochs).dual_obj
    cfg = SolverConfig(SamplingScheme(spec.schemes[0], spec.sigma), max_epochs=spec.max_epochs,
                       gap_tol=spec.gap_tol, seed=spec.seeds[0],
                       record_theory=spec.record_theory, suboptimality_ref=ref)
    res = run(problem, cfg)
    _emit(report.trace_csv(res.trace, spec.record_theory), spec.out)
    log.info("%s after %.3g epochs, gap %.3e", res.termination.value, res.final.epoch,
             res.final.gap)
    if res.theory is not None and not res.theory.clean:
        log.warning("theory audit found violations: %d monotone, %d descent, %d kappa, "
                    "%d coherence", len(res.theory.monotone_violations),
                    len(res.theory.descent_violations), len(res.theory.kappa_violations),
                    len(res.theory.coherence_violations))
    return EXIT_OK


def cmd_compare(args) -> int:
    spec, ds = _prepare(args)
    if not spec.out:
        raise UsageError("compare needs --out DIR")
    out = Path(spec.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    comp = report.compare(spec, ds)
    for o in comp.outcomes:
        if o.result is not None:
            report.write_trace(o.result.trace, out / "traces" / f"{o.scheme}_seed{o.seed}.csv",
                               spec.record_theory)
        else:
            log.error("%s seed %d failed: %s", o.scheme, o.seed, o.error)
    (out / "summary.csv").write_text(report.summary_csv(comp.rows, spec.eps_list))
    if args.figures:
        from .figures import render_comparison
        title = f"{spec.problem}, lambda={spec.lam:g}"
        for path in render_comparison(comp.outcomes, out, title):
            log.info("wrote %s", path)
    return EXIT_OK


def cmd_bench(args) -> int:
    spec, ds = _prepare(args)
    problem = make_problem(spec.problem, ds, spec.lam)
    table = report.bench(problem, spec.schemes, epochs=max(1, int(spec.max_epochs)),
                         seed=spec.seeds[0], sigma=spec.sigma)
    _emit(report.bench_csv(table), spec.out)
    return EXIT_OK


def cmd_stats(args) -> int:
    from .datasets import load_libsvm
    st = load_libsvm(args.data).stats()
    for k, v in st.items():
        print(f"{k}: {report.fmt(v)}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "compare": cmd_compare, "bench": cmd_bench, "stats": cmd_stats}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"adacd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"adacd: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalAbort, InvariantViolation, FloatingPointError) as exc:
        print(f"adacd: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"adacd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
