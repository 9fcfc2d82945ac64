"""Synthetic distributions, true-risk oracles and the two bias constructions.

Two constructions make the K-fold bias visible in closed form:

``RermConstruction``
    ``x = eps/M``, ``y = M sign(x)`` with a Rademacher ``eps``, so
    ``x y = 1`` and ``x^2 = 1/M^2`` on every draw.  A 1-D ridge fit with
    ``lambda(m) = 1/log(m) - 1/M^2`` returns ``beta = log(m)`` for any
    sample of size ``m``, and its loss ``(M - log(m)/M)^2`` is the same at
    every point.  Everything is deterministic.

``SgdConstruction``
    ``X = +v`` with probability ``p_plus`` else ``-v``, ``Y = 1``, loss
    ``w'Aw/2 - y x'w`` with ``Av = 0``.  SGD with steps ``log(m)/t`` keeps
    ``w`` on the line spanned by ``v``; the bias comes from the larger
    total step size of the full-data run.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import ConstructionError, OracleError
from .estimators import decompose, estimate_both
from .folds import build_kfold
from .learners import Dataset, LearnerSpec, LinearPredictor
from .rng import SplitMix64, derive_seed


def _mean(values):
    values = list(values)
    return math.fsum(values) / len(values)


# -- distributions --------------------------------------------------------------

@dataclass(frozen=True)
class RermDistribution:
    m_bound: float

    def support(self):
        m = self.m_bound
        return np.array([[1.0 / m], [-1.0 / m]]), np.array([m, -m]), np.array([0.5, 0.5])

    def sample(self, n: int, seed: int) -> Dataset:
        rng = SplitMix64(seed)
        eps = np.array([1.0 if rng.random() < 0.5 else -1.0 for _ in range(n)])
        x = eps / self.m_bound
        return Dataset(x[:, None], self.m_bound * np.sign(x))


@dataclass(frozen=True)
class SgdDistribution:
    p_plus: float = 2.0 / 3.0
    v: tuple = (1.0, 0.0)

    def support(self):
        v = np.array(self.v)
        return np.vstack([v, -v]), np.ones(2), np.array([self.p_plus, 1.0 - self.p_plus])

    def signs(self, n: int, seed: int) -> np.ndarray:
        rng = SplitMix64(seed)
        return np.array([1.0 if rng.random() < self.p_plus else -1.0 for _ in range(n)])

    def sample(self, n: int, seed: int) -> Dataset:
        return Dataset(np.outer(self.signs(n, seed), np.array(self.v)), np.ones(n))


@dataclass(frozen=True)
class LinearGaussian:
    """``x ~ N(0, I_d)``, ``y = x'theta + sigma z``; ``theta`` defaults to ``(1, ..., 1)/sqrt(d)``."""
    d: int = 5
    sigma: float = 1.0
    theta: tuple | None = None

    @property
    def coef(self) -> np.ndarray:
        if self.theta is None:
            return np.full(self.d, 1.0 / math.sqrt(self.d))
        return np.array(self.theta, dtype=float)

    def sample(self, n: int, seed: int) -> Dataset:
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, self.d))
        return Dataset(X, X @ self.coef + self.sigma * rng.standard_normal(n))


# -- oracles -------------------------------------------------------------------

class DiscreteOracle:
    """Exact risk for a distribution with finite support."""
    mode = "exact"

    def __init__(self, X, y, probs):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.probs = np.asarray(probs, dtype=float)
        if not (len(self.X) == len(self.y) == len(self.probs)):
            raise OracleError("support points, targets and probabilities differ in length")
        if np.any(self.probs < 0) or abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise OracleError("probabilities must be non-negative and sum to 1")

    @classmethod
    def of(cls, dist) -> "DiscreteOracle":
        return cls(*dist.support())

    def risk(self, pred) -> float:
        return math.fsum(self.probs * pred.losses(self.X, self.y))

    def risk_with_se(self, pred):
        return self.risk(pred), 0.0


class LinearGaussianOracle:
    """Closed-form squared-loss risk of a linear predictor under :class:`LinearGaussian`."""
    mode = "exact"

    def __init__(self, dist: LinearGaussian):
        self.dist = dist

    def risk(self, pred) -> float:
        if not isinstance(pred, LinearPredictor) or pred.loss_kind != "squared":
            raise OracleError("exact linear-Gaussian risk needs a squared-loss linear predictor")
        gap = self.dist.coef - pred.coef
        return float(gap @ gap) + pred.intercept ** 2 + self.dist.sigma ** 2

    def risk_with_se(self, pred):
        return self.risk(pred), 0.0


class MonteCarloOracle:
    """Risk as the mean loss over one fixed fresh sample.

    The sample is drawn once from ``seed``, so repeated calls and different
    predictors share it (common random numbers).
    """
    mode = "monte_carlo"

    def __init__(self, sampler, mc_samples: int = 100_000, seed: int = 0):
        if mc_samples < 2:
            raise ValueError("mc_samples must be >= 2")
        self.sampler = sampler
        self.mc_samples = mc_samples
        self.seed = seed
        self.sample = sampler.sample(mc_samples, seed)

    def risk_with_se(self, pred):
        losses = pred.losses(self.sample.X, self.sample.y)
        return (math.fsum(losses) / losses.size,
                float(np.std(losses, ddof=1)) / math.sqrt(losses.size))

    def risk(self, pred) -> float:
        return self.risk_with_se(pred)[0]


def make_oracle(family, params: dict | None = None, mc_samples: int | None = None,
                seed: int = 0):
    """Oracle for a named family or for any object with ``sample(n, seed)``.

    The two constructions always get exact oracles.  ``linear_gaussian``
    is exact unless ``mc_samples`` is given.
    """
    params = dict(params or {})
    if family in ("rerm", RermConstruction) or isinstance(family, RermConstruction):
        m = family.m_bound if isinstance(family, RermConstruction) else params["m_bound"]
        return DiscreteOracle.of(RermDistribution(m))
    if family in ("sgd",) or isinstance(family, SgdConstruction):
        dist = family.distribution() if isinstance(family, SgdConstruction) else SgdDistribution(**params)
        return DiscreteOracle.of(dist)
    if family == "linear_gaussian":
        dist = LinearGaussian(**params)
        if mc_samples is None:
            return LinearGaussianOracle(dist)
        return MonteCarloOracle(dist, mc_samples, seed)
    if hasattr(family, "sample"):
        return MonteCarloOracle(family, mc_samples or 100_000, seed)
    raise OracleError(f"unknown synthetic family {family!r}")


# -- constructions ----------------------------------------------------------------

def _check_folds(n, k):
    if k < 2:
        raise ConstructionError(f"k must be >= 2, got {k}")
    if n % k:
        raise ConstructionError(f"n={n} is not divisible by k={k}")


@dataclass(frozen=True)
class RermConstruction:
    m_bound: float
    n: int
    k: int

    def __post_init__(self):
        m, n, k = self.m_bound, self.n, self.k
        if not m > 1:
            raise ConstructionError(f"M must exceed 1, got {m}")
        _check_folds(n, k)
        if math.log(n) > m:
            raise ConstructionError(f"n={n} exceeds exp(M) for M={m}")
        if self.n_train < 2:
            raise ConstructionError("training folds need at least 2 points")
        if not math.log(n) < m * m:
            raise ConstructionError("need log(n) < M^2 for a positive regularization")

    @property
    def n_train(self) -> int:
        return self.n - self.n // self.k

    def spec(self) -> LearnerSpec:
        return LearnerSpec("rerm1d", lambda_schedule="rerm_log", m_bound=self.m_bound,
                           stability_constant=2.0, loss_bound=self.m_bound ** 2)

    def distribution(self) -> RermDistribution:
        return RermDistribution(self.m_bound)


@dataclass(frozen=True)
class RermReport:
    kfold_bias: float
    corrected_bias: float
    lower_bound: float
    upper_bound: float
    full_risk: float
    fold_risk: float
    beta_full: float
    sandwich_ok: bool

    def to_dict(self):
        return asdict(self)


def _rerm_bounds(c: RermConstruction):
    lk = math.log(c.k / (c.k - 1))
    return 2 * lk * (1 - 1 / c.m_bound), 2 * lk


def rerm_exact_report(c: RermConstruction) -> RermReport:
    m = c.m_bound
    lk = math.log(c.k / (c.k - 1))
    full = (m - math.log(c.n) / m) ** 2
    fold = (m - math.log(c.n_train) / m) ** 2
    bias = lk * (2 - (math.log(c.n) + math.log(c.n_train)) / m ** 2)
    lo, hi = _rerm_bounds(c)
    ok = lo <= bias <= hi
    if not ok:
        raise ConstructionError(f"bias {bias} outside [{lo}, {hi}]")
    return RermReport(bias, 0.0, lo, hi, full, fold, math.log(c.n), ok)


def rerm_simulated_report(c: RermConstruction, seed: int = 0, workers: int | None = 1) -> RermReport:
    """Measure the same quantities by running the learner on a sampled dataset."""
    data = c.distribution().sample(c.n, derive_seed(seed, 0))
    scheme = build_kfold(c.n, c.k, derive_seed(seed, 1))
    oracle = make_oracle(c)
    std, corr, fold_preds, full_pred = estimate_both(c.spec(), data, scheme, workers)
    full = oracle.risk(full_pred)
    fold = _mean(oracle.risk(p) for p in fold_preds)
    lo, hi = _rerm_bounds(c)
    bias = std.value - full
    return RermReport(bias, corr.value - full, lo, hi, full, fold,
                      float(full_pred.coef[0]), lo <= bias <= hi)


@dataclass(frozen=True)
class SgdConstruction:
    m_bound: float
    n: int
    k: int
    t: int = 10
    d: int = 2
    a_matrix: tuple | None = None
    v: tuple | None = None
    p_plus: float = 2.0 / 3.0

    def __post_init__(self):
        _check_folds(self.n, self.k)
        if math.log(self.n) > self.m_bound:
            raise ConstructionError(f"n={self.n} exceeds exp(M)")
        if self.t < 1:
            raise ConstructionError("t must be >= 1")
        if self.d < 2:
            raise ConstructionError("d must be >= 2")
        if not 0.0 < self.p_plus < 1.0:
            raise ConstructionError("p_plus must lie in (0, 1)")
        a, v = self.matrix, self.direction
        if a.shape != (self.d, self.d) or v.shape != (self.d,):
            raise ConstructionError("a_matrix and v must match d")
        if not np.allclose(a, a.T) or np.linalg.eigvalsh(a).min() < -1e-12:
            raise ConstructionError("a_matrix must be symmetric positive semi-definite")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ConstructionError("v must have unit norm")
        if np.abs(a @ v).max() > 1e-12:
            raise ConstructionError("a_matrix must annihilate v")

    @property
    def matrix(self) -> np.ndarray:
        if self.a_matrix is None:
            a = np.eye(self.d)
            a[0, 0] = 0.0
            return a
        return np.array(self.a_matrix, dtype=float)

    @property
    def direction(self) -> np.ndarray:
        if self.v is None:
            return np.eye(self.d)[0]
        return np.array(self.v, dtype=float)

    @property
    def n_train(self) -> int:
        return self.n - self.n // self.k

    def spec(self, seed: int = 0) -> LearnerSpec:
        return LearnerSpec("sgd_quadratic", sgd_steps=self.t, step_sizes="log_n_over_t",
                           a_matrix=self.matrix.tolist(), seed=seed)

    def distribution(self) -> SgdDistribution:
        return SgdDistribution(self.p_plus, tuple(self.direction))

    def step_sum(self, m: int) -> float:
        return math.log(m)


@dataclass(frozen=True)
class SgdReport:
    replicates: int
    expected_bias_mc: float
    expected_bias_se: float
    abs_error_mc: float
    abs_error_se: float
    corrected_bias_mc: float
    corrected_bias_se: float
    expected_bias_closed_form: float
    expected_bias_exact: float
    lower_bound: float
    stability_bound: float
    stability_ceiling: float
    cross_check_max_diff: float | None

    def to_dict(self):
        return asdict(self)


def _mean_se(x: np.ndarray):
    return math.fsum(x) / x.size, (float(np.std(x, ddof=1)) / math.sqrt(x.size) if x.size > 1 else math.nan)


def sgd_replicate_generic(c: SgdConstruction, seed: int, r: int):
    """Replicate ``r`` through the general learner/estimator path.

    Returns ``(standard - R[A(n)], corrected - R[A(n)])`` for the same
    data and algorithm streams that the compiled kernel uses.
    """
    data = c.distribution().sample(c.n, derive_seed(seed, r, 0))
    scheme = build_kfold(c.n, c.k)
    dec = decompose(c.spec(derive_seed(seed, r, 1)), data, scheme, make_oracle(c))
    return dec.standard - dec.true_risk_full, dec.corrected - dec.true_risk_full


def sgd_bias_report(c: SgdConstruction, replicates: int, seed: int = 0,
                    cross_check: int = 8) -> SgdReport:
    """Monte Carlo K-fold bias of SGD on the construction.

    ``expected_bias_closed_form`` is ``log(K/(K-1))/3``, the value the
    lower-bound statement asserts.  ``expected_bias_exact`` is the direct
    expectation ``(2 p_plus - 1)^2 (log n - log n_T)``: every data-dependent
    factor of the SGD iterate and of the validation loss contributes one
    factor ``E[sign] = 2 p_plus - 1``.  ``cross_check`` replicates are
    re-run through the general learner/estimator path and compared.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    cv, corr, full, _ = kernels.sgd_counterexample(c.n, c.k, c.t, replicates, seed, c.p_plus)
    err = cv - full
    mean, se = _mean_se(err)
    abs_mean, abs_se = _mean_se(np.abs(err))
    cmean, cse = _mean_se(corr - full)
    lk = math.log(c.k / (c.k - 1))
    diff = None
    if cross_check:
        diffs = []
        for r in range(min(cross_check, replicates)):
            e_std, e_corr = sgd_replicate_generic(c, seed, r)
            diffs += [abs(e_std - err[r]), abs(e_corr - (corr[r] - full[r]))]
        diff = float(max(diffs))
    return SgdReport(
        replicates=replicates,
        expected_bias_mc=mean, expected_bias_se=se,
        abs_error_mc=abs_mean, abs_error_se=abs_se,
        corrected_bias_mc=cmean, corrected_bias_se=cse,
        expected_bias_closed_form=(c.step_sum(c.n) - c.step_sum(c.n_train)) / 3,
        expected_bias_exact=(2 * c.p_plus - 1) ** 2 * (math.log(c.n) - math.log(c.n_train)),
        lower_bound=lk / 3,
        stability_bound=3 * c.step_sum(c.n) / (c.n - 1),
        stability_ceiling=3 * c.m_bound / (c.n - 1),
        cross_check_max_diff=diff,
    )
