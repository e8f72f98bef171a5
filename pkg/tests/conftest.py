import numpy as np
import pytest

from meanfield.losses import Dataset
from meanfield.model import Ensemble


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_instance(rng, m=None, d=None, n=None):
    m = m or int(rng.integers(1, 9))
    d = d or int(rng.integers(1, 6))
    n = n or int(rng.integers(1, 11))
    ens = Ensemble(rng.standard_normal((m, d + 1)))
    ds = Dataset(rng.standard_normal((n, d)), rng.standard_normal(n))
    return ens, ds


def central_diff(f, x, h=1e-5):
    x = np.array(x, dtype=np.float64)
    out = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        out[idx] = (f(xp) - f(xm)) / (2 * h)
    return out


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-12))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
