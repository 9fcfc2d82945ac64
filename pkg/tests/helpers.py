"""Mock learners and small utilities shared by the tests."""
import math
from dataclasses import dataclass

import numpy as np

from stablecv.learners import Dataset
from stablecv.rng import SplitMix64, derive_seed


@dataclass(frozen=True)
class HashedLossPredictor:
    """Loss at row l is a pseudorandom number keyed by (training set, l)."""
    key: int
    scale: float

    def losses(self, X, y):
        idx = np.asarray(X)[:, 0].astype(np.int64)
        return np.array([SplitMix64(derive_seed(self.key, int(i))).random() * self.scale for i in idx])

    def predict(self, X):
        return np.zeros(len(X))


@dataclass(frozen=True)
class HashedLossLearner:
    """Mock learner whose losses depend arbitrarily on the training subset."""
    seed: int = 0
    scale: float = 1.0
    stochastic: bool = False

    def fit(self, data, train):
        key = derive_seed(self.seed, *sorted(int(i) for i in train))
        return HashedLossPredictor(key, self.scale)


@dataclass(frozen=True)
class ShiftedLearner:
    """Wraps a learner and adds a constant to every loss."""
    inner: object
    shift: float

    @property
    def regularization(self):
        return self.inner.regularization

    def with_regularization(self, lam):
        return ShiftedLearner(self.inner.with_regularization(lam), self.shift)

    def fit(self, data, train):
        return _Shifted(self.inner.fit(data, train), self.shift)


@dataclass(frozen=True)
class _Shifted:
    inner: object
    shift: float

    def losses(self, X, y):
        return self.inner.losses(X, y) + self.shift


def index_dataset(n):
    """Dataset whose only feature is the row index."""
    return Dataset(np.arange(n, dtype=float)[:, None], np.zeros(n))


def log_ratio(k):
    return math.log(k / (k - 1))
