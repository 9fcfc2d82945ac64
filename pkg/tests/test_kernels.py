"""Both kernel backends must agree; PRNG-driven loops bit for bit."""
import numpy as np
import pytest

from stablecv import _pykernels as py
from stablecv import kernels
from stablecv.rng import SplitMix64

try:
    from stablecv import _ckernels as cy
except ImportError:  # pragma: no cover
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled kernels not built")


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


def test_draw_indices_match_rng():
    rng = SplitMix64(99)
    expected = [rng.below(37) for _ in range(200)]
    assert py.draw_indices(99, 37, 200).tolist() == expected


@needs_ext
def test_draw_indices_parity():
    assert np.array_equal(cy.draw_indices(5, 97, 5000), py.draw_indices(5, 97, 5000))


@needs_ext
@pytest.mark.parametrize("seed", [0, 1, 2 ** 63 + 5])
def test_sgd_quadratic_parity(seed):
    rng = np.random.default_rng(seed % 1000)
    X = rng.standard_normal((40, 3))
    y = rng.standard_normal(40)
    a = np.diag([0.0, 1.0, 2.0])
    train = np.arange(5, 40)
    steps = np.linspace(0.5, 0.05, 25)
    assert np.array_equal(cy.sgd_quadratic(a, X, y, train, steps, seed),
                          py.sgd_quadratic(a, X, y, train, steps, seed))


@needs_ext
@pytest.mark.parametrize("lam", [0.01, 1.0])
def test_pegasos_parity(lam):
    rng = np.random.default_rng(1)
    X = rng.standard_normal((60, 4))
    y = np.where(rng.standard_normal(60) > 0, 1.0, -1.0)
    train = np.arange(0, 60, 2)
    assert np.array_equal(cy.pegasos(X, y, train, lam, 300, 17), py.pegasos(X, y, train, lam, 300, 17))


@needs_ext
def test_counterexample_parity():
    a = cy.sgd_counterexample(50, 5, 7, 300, 42, 2 / 3)
    b = py.sgd_counterexample(50, 5, 7, 300, 42, 2 / 3)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


@needs_ext
def test_cholesky_parity():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((25, 25))
    s = m @ m.T + np.eye(25)
    (lc, ic), (lp, ip) = cy.cholesky(s), py.cholesky(s)
    assert ic == ip == -1
    np.testing.assert_allclose(lc, lp, rtol=0, atol=1e-12)
    b = rng.standard_normal(25)
    np.testing.assert_allclose(cy.cho_solve(lc, b), py.cho_solve(lp, b), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("impl", [py] + ([cy] if cy else []), ids=lambda m: m.BACKEND)
def test_cholesky_reports_failing_pivot(impl):
    s = np.array([[4.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    _, info = impl.cholesky(s)
    assert info == 1


@pytest.mark.parametrize("impl", [py] + ([cy] if cy else []), ids=lambda m: m.BACKEND)
def test_pegasos_stays_in_ball(impl):
    rng = np.random.default_rng(0)
    X = 10 * rng.standard_normal((30, 3))
    y = np.sign(rng.standard_normal(30))
    lam = 0.5
    w = impl.pegasos(X, y, np.arange(30), lam, 200, 1)
    assert w @ w <= 1 / lam * (1 + 1e-12)


@pytest.mark.parametrize("impl", [py] + ([cy] if cy else []), ids=lambda m: m.BACKEND)
def test_counterexample_iterate_matches_step_sum(impl):
    # all +v data: theta_n = log(n) exactly along v
    cv, corr, full, fold = impl.sgd_counterexample(20, 4, 5, 3, 0, 1.0)
    np.testing.assert_allclose(full, -np.log(20), rtol=1e-14)
    np.testing.assert_allclose(fold, -np.log(15), rtol=1e-14)
