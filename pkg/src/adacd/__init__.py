"""Primal-dual coordinate descent with adaptive coordinate sampling."""
from .datasets import (Dataset, DataError, load_libsvm, normalize_columns, subsample,
                       synthetic_lasso, synthetic_svm, write_libsvm)
from .linalg import OpCounter, SparseColumnMatrix
from .problems import HingeSVM, Lasso, PrimalDualState, lasso_lambda_max, make_problem
from .sampling import VARIANTS, SamplingScheme, SumTree, build_distribution
from .solver import RunResult, SolverConfig, Termination, TraceRecord, run

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DataError",
    "load_libsvm",
    "normalize_columns",
    "subsample",
    "synthetic_lasso",
    "synthetic_svm",
    "write_libsvm",
    "OpCounter",
    "SparseColumnMatrix",
    "HingeSVM",
    "Lasso",
    "PrimalDualState",
    "lasso_lambda_max",
    "make_problem",
    "VARIANTS",
    "SamplingScheme",
    "SumTree",
    "build_distribution",
    "RunResult",
    "SolverConfig",
    "Termination",
    "TraceRecord",
    "run",
]
