import numpy as np
import pytest
from hypothesis import given, strategies as st

from lstreg.core import Dataset, residuals
from lstreg.errors import ContractViolation
from lstreg.ols import ls_estimate, ls_fit

from conftest import gaussian_dataset


def normal_equations(W, y):
    return np.linalg.solve(W.T @ W, W.T @ y)


def test_two_point_interpolation():
    sol = ls_fit(Dataset.from_rows([(0, 1), (1, 3)]))
    np.testing.assert_allclose(sol.beta, [1, 2], atol=1e-12)
    assert sol.ss == pytest.approx(0, abs=1e-20)
    assert not sol.rank_deficient


def test_rank_deficient_duplicated_column(rng):
    x = rng.standard_normal(12)
    d = Dataset(np.column_stack([x, x]), 1 + 2 * x + 0.1 * rng.standard_normal(12))
    sol = ls_fit(d)
    assert sol.rank_deficient and sol.rank == 2
    # minimum norm splits the slope evenly between the two copies
    assert sol.beta[1] == pytest.approx(sol.beta[2], rel=1e-8)


def test_matches_normal_equations(rng):
    d = gaussian_dataset(rng, 20, 3, beta=[1, -2, 0.5])
    sol = ls_fit(d)
    np.testing.assert_allclose(sol.beta, normal_equations(d.design, d.y), atol=1e-8)
    r = residuals(d, sol.beta)
    assert sol.ss == pytest.approx(r @ r, rel=1e-9)


def test_subset(rng):
    d = gaussian_dataset(rng, 30, 4)
    sub = np.arange(0, 30, 2)
    sol = ls_fit(d, sub)
    np.testing.assert_allclose(sol.beta, normal_equations(d.design[sub], d.y[sub]), atol=1e-8)


def test_empty_subset(rng):
    with pytest.raises(ContractViolation):
        ls_fit(gaussian_dataset(rng, 5, 2), [])


def test_ls_estimate_retains_everything(rng):
    d = gaussian_dataset(rng, 15, 3)
    fit = ls_estimate(d)
    assert fit.method == "LS"
    np.testing.assert_array_equal(fit.retained, np.arange(15))
    assert fit.recompute_objective(d) == pytest.approx(fit.objective, rel=1e-10)


def test_correlated_design_stays_accurate(rng):
    # off-diagonal 0.9 correlation, the benchmark's hard case
    n, k = 200, 9
    L = np.linalg.cholesky(np.full((k, k), 0.9) + 0.1 * np.eye(k))
    X = rng.standard_normal((n, k)) @ L.T
    beta = np.arange(k + 1, dtype=float)
    d = Dataset(X, beta[0] + X @ beta[1:])
    np.testing.assert_allclose(ls_fit(d).beta, beta, atol=1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_orthogonality_equivariance_idempotence(seed, p):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(p + 2, 40))
    d = gaussian_dataset(rng, n, p, beta=rng.standard_normal(p))
    sub = np.sort(rng.choice(n, size=int(rng.integers(p + 1, n + 1)), replace=False))
    sol = ls_fit(d, sub)

    W, r = d.design[sub], residuals(d, sol.beta)[sub]
    scale = np.abs(W).sum(axis=0) * (np.abs(r).max() + 1)
    assert np.all(np.abs(W.T @ r) <= 1e-8 * scale)

    b = rng.standard_normal(p)
    shifted = Dataset(d.X, d.y + d.design @ b)
    np.testing.assert_allclose(ls_fit(shifted, sub).beta, sol.beta + b, atol=1e-8)

    np.testing.assert_array_equal(ls_fit(d, sub).beta, sol.beta)
