"""Grid search over the regularization parameter with standard or corrected K-fold."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitError
from .estimators import estimate_both
from .parallel import ordered_map

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelGrid:
    specs: tuple
    a: float
    b: float
    step: float | None = None

    def __post_init__(self):
        if not self.specs:
            raise ValueError("empty model grid")
        lams = self.lambdas
        if any(y <= x for x, y in zip(lams, lams[1:])):
            raise ValueError("grid regularization values must be strictly increasing")
        if lams[0] < self.a or lams[-1] > self.b:
            raise ValueError("grid values fall outside [a, b]")

    @property
    def lambdas(self) -> list[float]:
        return [s.regularization for s in self.specs]

    def __len__(self):
        return len(self.specs)

    @classmethod
    def from_values(cls, base, values) -> "ModelGrid":
        values = sorted(float(v) for v in values)
        return cls(tuple(base.with_regularization(v) for v in values), values[0], values[-1])

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "step": self.step, "size": len(self),
                "lambdas": self.lambdas}


def build_grid(base, a: float, b: float, step: float) -> ModelGrid:
    """Specs ``base`` with ``lambda = a + j*step`` for every ``j >= 0`` with ``lambda <= b``."""
    if not 0 < a <= b:
        raise ValueError(f"need 0 < a <= b, got a={a}, b={b}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    count = math.floor((b - a) / step + 1e-9) + 1
    lams = [min(a + j * step, b) for j in range(count)]
    return ModelGrid(tuple(base.with_regularization(v) for v in lams), a, b, step)


@dataclass(frozen=True)
class SelectionResult:
    chosen_standard: int
    chosen_corrected: int
    per_model_standard: tuple
    per_model_corrected: tuple
    test_risk_standard: float
    test_se_standard: float
    test_risk_corrected: float
    test_se_corrected: float
    lambdas: tuple
    failed: tuple = ()
    oracle_index: int | None = None
    oracle_risk: float | None = None
    true_risks: tuple | None = None
    full_predictors: tuple = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        out = {
            "chosen_standard": self.chosen_standard,
            "chosen_corrected": self.chosen_corrected,
            "lambda_standard": self.lambdas[self.chosen_standard],
            "lambda_corrected": self.lambdas[self.chosen_corrected],
            "test_risk_standard": self.test_risk_standard,
            "test_se_standard": self.test_se_standard,
            "test_risk_corrected": self.test_risk_corrected,
            "test_se_corrected": self.test_se_corrected,
            "per_model_standard": [_num(v) for v in self.per_model_standard],
            "per_model_corrected": [_num(v) for v in self.per_model_corrected],
            "lambdas": list(self.lambdas),
            "failed": list(self.failed),
        }
        if self.oracle_index is not None:
            out["oracle_index"] = self.oracle_index
            out["oracle_risk"] = self.oracle_risk
        return out


def _num(v):
    return None if math.isnan(v) else v


def argmin_smallest_lambda(values) -> int:
    """Index of the minimum; exact ties go to the earliest (smallest lambda) entry."""
    arr = np.asarray(values, dtype=float)
    if np.all(np.isnan(arr)):
        raise FitError("every model in the grid failed to fit")
    return int(np.nanargmin(arr))


def _test_risk(pred, test):
    losses = pred.losses(test.X, test.y)
    se = float(np.std(losses, ddof=1)) / math.sqrt(losses.size) if losses.size > 1 else 0.0
    return math.fsum(losses) / losses.size, se


def select(grid: ModelGrid, train_data, scheme, test_data, oracle=None,
           workers: int | None = 1) -> SelectionResult:
    """Score every grid model with both estimators, pick the argmins, test them.

    Models that fail to fit are reported and excluded.  With an ``oracle``
    the true risk of every full-data model is recorded as well.
    """
    if train_data.d != test_data.d:
        raise ValueError(f"train has d={train_data.d} features, test has d={test_data.d}")

    def run(spec):
        try:
            std, corr, _, full = estimate_both(spec, train_data, scheme)
        except FitError as exc:
            log.warning("model lambda=%g excluded: %s", spec.regularization, exc)
            return math.nan, math.nan, None
        return std.value, corr.value, full

    out = ordered_map(run, grid.specs, workers)
    std_vals = tuple(o[0] for o in out)
    corr_vals = tuple(o[1] for o in out)
    preds = tuple(o[2] for o in out)
    failed = tuple(i for i, p in enumerate(preds) if p is None)
    i_std = argmin_smallest_lambda(std_vals)
    i_corr = argmin_smallest_lambda(corr_vals)
    t_std, se_std = _test_risk(preds[i_std], test_data)
    t_corr, se_corr = _test_risk(preds[i_corr], test_data)
    o_idx = o_risk = true = None
    if oracle is not None:
        true = tuple(math.nan if p is None else float(oracle.risk(p)) for p in preds)
        o_idx = argmin_smallest_lambda(true)
        o_risk = true[o_idx]
    return SelectionResult(i_std, i_corr, std_vals, corr_vals, t_std, se_std, t_corr, se_corr,
                           tuple(grid.lambdas), failed, o_idx, o_risk, true, preds)


def excess_risk(result: SelectionResult, oracle, grid: ModelGrid, full_train) -> dict:
    """True risk of each selected full-data model minus the best in the grid."""
    if result.true_risks is not None:
        true = result.true_risks
    else:
        everyone = np.arange(len(full_train))
        true = []
        for spec in grid.specs:
            try:
                true.append(float(oracle.risk(spec.fit(full_train, everyone))))
            except FitError:
                true.append(math.nan)
    best = float(np.nanmin(true))
    return {
        "standard": true[result.chosen_standard] - best,
        "corrected": true[result.chosen_corrected] - best,
        "oracle_risk": best,
        "oracle_index": argmin_smallest_lambda(true),
        "true_risks": list(true),
    }


def sup_gap(estimates, true_risks) -> float:
    """``max_m |estimate_m - R_m|`` over models that fitted."""
    gaps = [abs(e - t) for e, t in zip(estimates, true_risks)
            if not (math.isnan(e) or math.isnan(t))]
    return max(gaps)

