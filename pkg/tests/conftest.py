import numpy as np
import pytest

from adacd.datasets import DATAPOINTS, FEATURES, Dataset
from adacd.linalg import SparseColumnMatrix
from adacd.problems import HingeSVM, Lasso

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_addoption(parser):
    parser.addoption("--mushrooms", action="store", default=None,
                     help="path to the LIBSVM mushrooms file for the dataset-statistics check")


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


class _Criterion:
    def __init__(self, config):
        self.config = config

    def _log(self, line):
        self.config.stash[ACCEPTANCE_KEY].append(line)
        print(line)

    def __call__(self, k, passed, detail=""):
        """Record one summary line, then assert."""
        line = f"criterion {k}: {'PASS' if passed else 'FAIL'} {detail}".rstrip()
        self._log(line)
        assert passed, line

    def skip(self, k, reason):
        self._log(f"criterion {k}: SKIP {reason}")
        pytest.skip(reason)


@pytest.fixture
def criterion(request):
    return _Criterion(request.config)


def random_matrix(rng, d, n, density=0.6, scale=1.0):
    a = rng.standard_normal((d, n)) * scale
    a *= rng.random((d, n)) < density
    return a


def random_lasso(rng, d, n, density=0.6, lam=None):
    a = random_matrix(rng, d, n, density)
    y = rng.standard_normal(d)
    ds = Dataset(SparseColumnMatrix.from_dense(a), y, FEATURES)
    if lam is None:
        lam = float(rng.uniform(0.05, 2.0))
    return Lasso(ds, lam), a, y


def random_svm(rng, d, n, density=0.6, lam=None):
    a = random_matrix(rng, d, n, density)
    y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    ds = Dataset(SparseColumnMatrix.from_dense(a), y, DATAPOINTS)
    if lam is None:
        lam = float(10 ** rng.uniform(-2, 0))
    return HingeSVM(ds, lam), a, y


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
