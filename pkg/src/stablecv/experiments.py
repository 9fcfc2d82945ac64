"""Seeded synthetic experiments built from the library pieces."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_io import split_train_test
from .estimators import decompose
from .folds import build_kfold
from .learners import LearnerSpec
from .oracles import LinearGaussian, LinearGaussianOracle
from .rng import derive_seed
from .selection import ModelGrid, build_grid, excess_risk, select, sup_gap

# lambda = 0.01, 0.02, ..., 10
DEFAULT_RIDGE_GRID = tuple(build_grid(LearnerSpec("ridge"), 0.01, 10.0, 0.01).lambdas)


@dataclass(frozen=True)
class SelectionRun:
    seed: int
    test_standard: float
    test_corrected: float
    excess_standard: float
    excess_corrected: float
    gap_corrected: float

    @property
    def key_inequality(self) -> bool:
        return self.excess_corrected <= 2 * self.gap_corrected


def ridge_selection_runs(n: int = 300, d: int = 5, sigma: float = 1.0, k: int = 3,
                         seeds: int = 50, grid_values=DEFAULT_RIDGE_GRID,
                         test_fraction: float = 1 / 3, seed: int = 0) -> list[SelectionRun]:
    """Ridge grid search on linear-Gaussian data, one run per seed.

    Each run samples ``n`` points, holds out ``test_fraction`` of them and
    drops the trailing ``n_train mod k`` training points so that ``k``
    divides the training size.
    """
    dist = LinearGaussian(d, sigma)
    oracle = LinearGaussianOracle(dist)
    grid = ModelGrid.from_values(LearnerSpec("ridge"), grid_values)
    runs = []
    for s in range(seeds):
        full = dist.sample(n, derive_seed(seed, s, 0))
        train, test = split_train_test(full, test_fraction, derive_seed(seed, s, 1))
        scheme = build_kfold(len(train), k, derive_seed(seed, s, 2), truncate=True)
        if scheme.dropped:
            train = train.subset(np.arange(scheme.n))
        res = select(grid, train, scheme, test, oracle=oracle)
        ex = excess_risk(res, oracle, grid, train)
        runs.append(SelectionRun(s, res.test_risk_standard, res.test_risk_corrected,
                                 ex["standard"], ex["corrected"],
                                 sup_gap(res.per_model_corrected, res.true_risks)))
    return runs


def corrected_error_curve(sizes=(100, 400, 1600), seeds: int = 200, lam: float = 0.1,
                          k: int = 5, d: int = 5, sigma: float = 1.0, seed: int = 0) -> dict:
    """Mean absolute error of both estimators against ``R[A([n])]`` for ridge.

    Returns per-size means and the least-squares log-log slope of the
    corrected curve.
    """
    dist = LinearGaussian(d, sigma)
    oracle = LinearGaussianOracle(dist)
    spec = LearnerSpec("ridge", regularization=lam)
    corrected, standard = [], []
    for n in sizes:
        ec, es = [], []
        for s in range(seeds):
            data = dist.sample(n, derive_seed(seed, n, s, 0))
            dec = decompose(spec, data, build_kfold(n, k, derive_seed(seed, n, s, 1)), oracle)
            ec.append(abs(dec.corrected - dec.true_risk_full))
            es.append(abs(dec.standard - dec.true_risk_full))
        corrected.append(math.fsum(ec) / seeds)
        standard.append(math.fsum(es) / seeds)
    slope = float(np.polyfit(np.log(sizes), np.log(corrected), 1)[0])
    return {"sizes": list(sizes), "corrected": corrected, "standard": standard, "slope": slope}
