import numpy as np
import pytest
from hypothesis import given, strategies as st

from stablecv.errors import SingularSystemError
from stablecv.linalg import LAPACK_THRESHOLD, cholesky_factor, spd_solve


@given(st.integers(1, 12), st.integers(0, 10 ** 6))
def test_solve_small(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n))
    a = m @ m.T + n * np.eye(n)
    b = rng.standard_normal(n)
    x = spd_solve(a, b)
    np.testing.assert_allclose(a @ x, b, atol=1e-9)


def test_factor_is_lower_triangular():
    a = np.array([[4.0, 2.0], [2.0, 3.0]])
    low = cholesky_factor(a)
    assert low[0, 1] == 0.0
    np.testing.assert_allclose(low @ low.T, a, atol=1e-14)
    np.testing.assert_allclose(low, [[2.0, 0.0], [1.0, np.sqrt(2.0)]], atol=1e-15)


@pytest.mark.parametrize("n", [LAPACK_THRESHOLD + 1, 150])
def test_large_path(n):
    rng = np.random.default_rng(n)
    m = rng.standard_normal((n, n))
    a = m @ m.T + np.eye(n)
    b = rng.standard_normal(n)
    np.testing.assert_allclose(a @ spd_solve(a, b), b, atol=1e-8)


@pytest.mark.parametrize("n", [3, LAPACK_THRESHOLD + 4])
def test_singular_reports_pivot(n):
    a = np.eye(n)
    a[2, 2] = -1.0
    with pytest.raises(SingularSystemError) as err:
        cholesky_factor(a)
    assert err.value.pivot == 2


def test_non_finite_rejected():
    with pytest.raises(SingularSystemError):
        cholesky_factor(np.array([[np.nan]]))


def test_non_square_rejected():
    with pytest.raises(ValueError):
        cholesky_factor(np.ones((2, 3)))
