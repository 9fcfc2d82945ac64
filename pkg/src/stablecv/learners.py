"""Learners: a spec, a dataset and a training index set in, a predictor out.

Every predictor exposes ``losses(X, y)`` (vectorised per-observation
loss) and ``predict(X)``.  Anything with a ``fit(data, train)`` method
returning such a predictor can be plugged into the estimators.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import kernels
from .errors import FitError
from .linalg import spd_solve
from .rng import derive_seed

KINDS = ("rerm1d", "ridge", "kernel_ridge_sigmoid", "hinge_sgd", "sgd_quadratic")
STOCHASTIC_KINDS = ("hinge_sgd", "sgd_quadratic")


@dataclass(frozen=True)
class Observation:
    features: np.ndarray
    target: float


class Dataset:
    """``n`` observations with ``d`` real features and a real target."""

    __slots__ = ("X", "y")

    def __init__(self, X, y):
        X = np.array(X, dtype=np.float64, copy=True)
        y = np.array(y, dtype=np.float64, copy=True).reshape(-1)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} feature rows but {y.shape[0]} targets")
        if X.shape[0] < 1:
            raise ValueError("dataset must have at least one row")
        bad = ~(np.isfinite(X).all(axis=1) & np.isfinite(y))
        if bad.any():
            raise ValueError(f"non-finite value in row {int(np.flatnonzero(bad)[0])}")
        X.setflags(write=False)
        y.setflags(write=False)
        self.X = X
        self.y = y

    @classmethod
    def from_observations(cls, rows) -> "Dataset":
        rows = list(rows)
        return cls([np.asarray(r.features, dtype=float) for r in rows], [r.target for r in rows])

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]

    @property
    def rows(self) -> list[Observation]:
        return [Observation(x, float(t)) for x, t in zip(self.X, self.y)]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx])

    def __eq__(self, other):
        return (isinstance(other, Dataset) and np.array_equal(self.X, other.X)
                and np.array_equal(self.y, other.y))

    def __repr__(self):
        return f"Dataset(n={self.n}, d={self.d})"


# -- predictors ---------------------------------------------------------------

class _Predictor:
    def losses(self, X, y) -> np.ndarray:
        raise NotImplementedError

    def loss(self, obs: Observation) -> float:
        return float(self.losses(np.asarray(obs.features, dtype=float)[None, :],
                                 np.array([obs.target]))[0])


@dataclass(frozen=True)
class LinearPredictor(_Predictor):
    """``g(x) = x'coef + intercept`` under squared or hinge loss."""
    coef: np.ndarray
    intercept: float = 0.0
    loss_kind: str = "squared"

    def predict(self, X):
        return np.asarray(X, dtype=float) @ self.coef + self.intercept

    def losses(self, X, y):
        g = self.predict(X)
        if self.loss_kind == "hinge":
            return np.maximum(0.0, 1.0 - np.asarray(y) * g)
        return (np.asarray(y) - g) ** 2


@dataclass(frozen=True)
class KernelPredictor(_Predictor):
    """Sigmoid-kernel expansion ``g(x) = sum_i alpha_i tanh(tau <x_i, x>)``."""
    support: np.ndarray
    alpha: np.ndarray
    tau: float

    def predict(self, X):
        return np.tanh(self.tau * (np.asarray(X, dtype=float) @ self.support.T)) @ self.alpha

    def losses(self, X, y):
        return (np.asarray(y) - self.predict(X)) ** 2


@dataclass(frozen=True)
class QuadraticPredictor(_Predictor):
    """Linear model under ``l(w, (x, y)) = w'Aw/2 - y x'w``; the loss may be negative."""
    w: np.ndarray
    a_matrix: np.ndarray

    def predict(self, X):
        return np.asarray(X, dtype=float) @ self.w

    def losses(self, X, y):
        quad = 0.5 * float(self.w @ self.a_matrix @ self.w)
        return quad - np.asarray(y) * self.predict(X)


# -- spec ---------------------------------------------------------------------

@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    regularization: float = 1.0
    lambda_schedule: str = "fixed"     # or "rerm_log": 1/log(m) - 1/M^2 for training size m
    m_bound: float | None = None
    kernel_scale: float | None = None  # None -> 1/d
    sgd_steps: int = 10
    passes: int = 5
    step_sizes: Any = "default"
    seed: int = 0
    stability_constant: float | None = None
    loss_bound: float | None = None
    a_matrix: Any = None
    fit_intercept: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}; expected one of {KINDS}")
        if self.lambda_schedule not in ("fixed", "rerm_log"):
            raise ValueError(f"unknown lambda_schedule {self.lambda_schedule!r}")
        if self.lambda_schedule == "rerm_log":
            if self.kind != "rerm1d":
                raise ValueError("lambda_schedule='rerm_log' applies to rerm1d only")
            if self.m_bound is None or self.m_bound <= 1:
                raise ValueError("lambda_schedule='rerm_log' needs m_bound > 1")
        elif self.kind != "sgd_quadratic" and not self.regularization > 0:
            raise ValueError(f"regularization must be > 0, got {self.regularization}")
        if self.kind == "sgd_quadratic" and self.sgd_steps < 1:
            raise ValueError("sgd_steps must be >= 1")
        if self.kind == "hinge_sgd" and self.passes < 1:
            raise ValueError("passes must be >= 1")
        if self.a_matrix is not None:
            object.__setattr__(self, "a_matrix",
                               tuple(tuple(float(v) for v in row) for row in self.a_matrix))

    @property
    def stochastic(self) -> bool:
        return self.kind in STOCHASTIC_KINDS

    def with_regularization(self, lam: float) -> "LearnerSpec":
        return dataclasses.replace(self, regularization=float(lam))

    def lam(self, m: int) -> float:
        if self.lambda_schedule == "rerm_log":
            return 1.0 / math.log(m) - 1.0 / self.m_bound ** 2
        return float(self.regularization)

    def fit(self, data: Dataset, train) -> _Predictor:
        return fit(self, data, train)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["a_matrix"] is not None:
            d["a_matrix"] = [list(r) for r in d["a_matrix"]]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LearnerSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown learner fields: {sorted(unknown)}")
        return cls(**d)


# -- fitting ------------------------------------------------------------------

def _check_train(data: Dataset, train) -> np.ndarray:
    idx = np.asarray(train, dtype=np.int64).reshape(-1)
    if idx.size == 0:
        raise FitError("training set is empty")
    if idx.min() < 0 or idx.max() >= data.n:
        raise FitError(f"training index out of range for n={data.n}")
    return idx


def _fit_rerm1d(spec, X, y):
    m = len(y)
    if X.shape[1] != 1:
        raise FitError(f"rerm1d needs 1 feature, got {X.shape[1]}")
    x = X[:, 0]
    lam = spec.lam(m)
    if not lam > 0:
        raise FitError(f"non-positive regularization {lam} at training size {m}")
    beta = (math.fsum(x * y) / m) / (math.fsum(x * x) / m + lam)
    return LinearPredictor(np.array([beta]))


def _fit_ridge(spec, X, y):
    m, d = X.shape
    if spec.fit_intercept:
        xm, ym = X.mean(axis=0), y.mean()
        X, y = X - xm, y - ym
    gram = X.T @ X / m + spec.regularization * np.eye(d)
    theta = spd_solve(gram, X.T @ y / m)
    intercept = float(ym - xm @ theta) if spec.fit_intercept else 0.0
    return LinearPredictor(theta, intercept)


def _fit_kernel_ridge(spec, X, y):
    m, d = X.shape
    tau = spec.kernel_scale if spec.kernel_scale is not None else 1.0 / d
    gram = np.tanh(tau * (X @ X.T))
    alpha = spd_solve(gram + m * spec.regularization * np.eye(m), y)
    return KernelPredictor(X.copy(), alpha, tau)


def _fit_hinge(spec, X, y, train):
    if spec.step_sizes not in ("default", "pegasos"):
        raise FitError("hinge_sgd supports only the 1/(lambda k) step schedule")
    if spec.fit_intercept:
        X = np.hstack([X, np.ones((X.shape[0], 1))])
    steps = spec.passes * len(train)
    w = kernels.pegasos(X, y, np.arange(len(train)), spec.regularization, steps,
                        derive_seed(spec.seed, 0x68696E6765))
    if spec.fit_intercept:
        return LinearPredictor(w[:-1].copy(), float(w[-1]), "hinge")
    return LinearPredictor(w, 0.0, "hinge")


def quadratic_matrix(spec: LearnerSpec, d: int) -> np.ndarray:
    """The PSD matrix ``A``; by default ``diag(0, 1, ..., 1)``."""
    if spec.a_matrix is None:
        a = np.eye(d)
        a[0, 0] = 0.0
        return a
    a = np.array(spec.a_matrix, dtype=np.float64)
    if a.shape != (d, d):
        raise FitError(f"a_matrix has shape {a.shape}, data has d={d}")
    return a


def sgd_step_sizes(spec: LearnerSpec, m: int) -> np.ndarray:
    t = spec.sgd_steps
    sched = spec.step_sizes
    if sched in ("default", "log_n_over_t"):
        return np.full(t, math.log(m) / t)
    if isinstance(sched, str):
        raise FitError(f"unknown step-size schedule {sched!r}")
    return np.full(t, float(sched))


def _fit_sgd_quadratic(spec, data, train):
    a = quadratic_matrix(spec, data.d)
    # the algorithm stream depends on the seed only, so full-data and fold
    # fits share their randomness
    w = kernels.sgd_quadratic(a, data.X, data.y, train, sgd_step_sizes(spec, len(train)), spec.seed)
    return QuadraticPredictor(w, a)


def fit(spec: LearnerSpec, data: Dataset, train) -> _Predictor:
    idx = _check_train(data, train)
    if spec.kind == "sgd_quadratic":
        return _fit_sgd_quadratic(spec, data, idx)
    X, y = data.X[idx], data.y[idx]
    if spec.kind == "rerm1d":
        return _fit_rerm1d(spec, X, y)
    if spec.kind == "ridge":
        return _fit_ridge(spec, X, y)
    if spec.kind == "kernel_ridge_sigmoid":
        return _fit_kernel_ridge(spec, X, y)
    return _fit_hinge(spec, X, y, idx)


def empirical_risk(pred, data: Dataset, subset=None) -> float:
    """Mean loss of ``pred`` over ``subset`` (default: every row)."""
    idx = np.arange(data.n) if subset is None else np.asarray(subset, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("empirical risk over an empty subset")
    return math.fsum(pred.losses(data.X[idx], data.y[idx])) / idx.size


@dataclass(frozen=True)
class ConstantLearner:
    """Learner whose predictor has the same loss everywhere; handy as a baseline."""
    value: float = 0.0
    regularization: float = 1.0
    stochastic: bool = field(default=False, init=False)

    def with_regularization(self, lam):
        return ConstantLearner(self.value, float(lam))

    def fit(self, data, train):
        _check_train(data, train)
        return ConstantPredictor(self.value)


@dataclass(frozen=True)
class ConstantPredictor(_Predictor):
    value: float

    def predict(self, X):
        return np.zeros(np.asarray(X).shape[0])

    def losses(self, X, y):
        return np.full(np.asarray(y).shape[0], float(self.value))
