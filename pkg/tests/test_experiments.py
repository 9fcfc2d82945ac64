import logging

import numpy as np
import pytest

from stablecv.bounds import BoundInputs, model_selection_bound
from stablecv.experiments import DEFAULT_RIDGE_GRID, corrected_error_curve, ridge_selection_runs
from stablecv.learners import LearnerSpec
from stablecv.oracles import LinearGaussian
from stablecv.stability import probe_stability

COARSE = tuple(np.geomspace(0.01, 10, 13).tolist())


@pytest.fixture(scope="module")
def runs():
    logging.disable(logging.WARNING)
    try:
        return ridge_selection_runs(seeds=12, grid_values=COARSE, seed=5)
    finally:
        logging.disable(logging.NOTSET)


def test_default_grid():
    assert len(DEFAULT_RIDGE_GRID) == 1000
    assert DEFAULT_RIDGE_GRID[0] == 0.01 and DEFAULT_RIDGE_GRID[-1] == 10.0


def test_runs_deterministic(runs):
    logging.disable(logging.WARNING)
    try:
        again = ridge_selection_runs(seeds=3, grid_values=COARSE, seed=5)
    finally:
        logging.disable(logging.NOTSET)
    assert again == runs[:3]


def test_key_inequality_every_run(runs):
    assert all(r.key_inequality for r in runs)
    assert all(r.excess_standard >= 0 and r.excess_corrected >= 0 for r in runs)


def test_excess_below_selection_bound_with_measured_constants(runs):
    # stability constant measured at the least regularized model, loss bound from a large sample
    dist = LinearGaussian(5)
    spec = LearnerSpec("ridge", regularization=COARSE[0])
    prof = probe_stability(spec, dist, [66, 132], trials=2, removals=10)
    m_const = max(e.beta_hat * e.n_train for e in prof.entries)
    sample = dist.sample(2000, 9)
    big_l = float(np.max(spec.fit(sample, np.arange(2000)).losses(sample.X, sample.y)))
    bound = model_selection_bound(BoundInputs(198, 3, delta=0.05, big_l=big_l, c=m_const,
                                              m_const=m_const, model_count=len(COARSE)))
    freq = np.mean([r.excess_corrected <= bound for r in runs])
    assert freq >= 0.94


def test_error_curve_shape():
    curve = corrected_error_curve(sizes=(50, 200), seeds=20)
    assert curve["sizes"] == [50, 200]
    assert curve["corrected"][1] < curve["corrected"][0]
    assert curve["slope"] < 0
