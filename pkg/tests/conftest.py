import numpy as np
import pytest
from hypothesis import settings

from lstreg.core import Dataset

settings.register_profile("default", deadline=None, derandomize=True)
settings.load_profile("default")


def gaussian_dataset(rng, n, p, beta=None, noise=1.0):
    X = rng.standard_normal((n, p - 1))
    beta = np.zeros(p) if beta is None else np.asarray(beta, dtype=float)
    y = beta[0] + X @ beta[1:] + noise * rng.standard_normal(n)
    return Dataset(X, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
