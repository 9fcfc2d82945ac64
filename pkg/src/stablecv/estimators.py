"""Standard and bias-corrected K-fold risk estimates and error decompositions.

Notation: ``ER[g, S]`` is the mean loss of predictor ``g`` over index set
``S``; ``A(T)`` is the learner trained on ``T``; ``R[g]`` is the true risk.

* standard:  ``cv = mean_j ER[A(T_j), V_j]``
* corrected: ``cv + ER[A([n]), [n]] - mean_j ER[A(T_j), [n]]``

The corrected value is also computed in the rearranged form
``ER[A([n]), [n]] + (n_T/n) mean_j (ER[A(T_j), V_j] - ER[A(T_j), T_j])``
and the two are required to agree.

All sums go through ``math.fsum``, so aggregates do not depend on fold
order or on the order in which worker threads finish.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError, FoldError, StableCVError
from .folds import FoldScheme, verify_balance
from .learners import empirical_risk
from .parallel import ordered_map

# relative tolerance for the runtime cross-check of the two corrected forms
FORM_RTOL = 1e-12


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


@dataclass(frozen=True)
class FoldRisks:
    validation: float
    train: float
    all: float
    predictor: object


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    corrected: bool
    per_fold_validation: tuple
    per_fold_train: tuple
    per_fold_all: tuple
    scheme: FoldScheme
    full_train: float | None = None
    alt_value: float | None = None

    @property
    def k(self) -> int:
        return len(self.per_fold_validation)

    def to_dict(self, include_scheme: bool = False) -> dict:
        out = {
            "value": self.value,
            "corrected": self.corrected,
            "n": self.scheme.n,
            "k": self.scheme.k,
            "per_fold_validation": list(self.per_fold_validation),
            "per_fold_train": list(self.per_fold_train),
            "per_fold_all": list(self.per_fold_all),
            "full_train": self.full_train,
            "alt_value": self.alt_value,
        }
        if include_scheme:
            out["scheme"] = self.scheme.to_dict()
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _check_scheme(data, scheme: FoldScheme):
    if scheme.n != len(data):
        raise FoldError(f"scheme is for n={scheme.n} but the dataset has {len(data)} rows")
    if getattr(scheme, "_verified", False):
        return
    report = verify_balance(scheme)
    if not report:
        raise FoldError(f"invalid fold scheme ({report.invariant}): {report.detail}")
    # schemes are immutable, so one successful check is enough
    object.__setattr__(scheme, "_verified", True)


def fold_risks(learner, data, scheme: FoldScheme, workers: int | None = 1) -> list[FoldRisks]:
    """Fit each fold model once and evaluate it on V_j, T_j and [n]."""
    _check_scheme(data, scheme)

    def one(j):
        f = scheme.folds[j]
        try:
            pred = learner.fit(data, f.train)
        except FitError as exc:
            exc.fold = j
            raise
        return FoldRisks(empirical_risk(pred, data, f.validation),
                         empirical_risk(pred, data, f.train),
                         empirical_risk(pred, data),
                         pred)

    return ordered_map(one, range(scheme.k), workers)


def _standard(scheme, risks) -> RiskEstimate:
    val = tuple(r.validation for r in risks)
    return RiskEstimate(_mean(val), False, val, tuple(r.train for r in risks),
                        tuple(r.all for r in risks), scheme)


def _corrected(scheme, risks, full_train) -> RiskEstimate:
    val = tuple(r.validation for r in risks)
    trn = tuple(r.train for r in risks)
    allr = tuple(r.all for r in risks)
    value = math.fsum([_mean(val), full_train, -_mean(allr)])
    ratio = scheme.n_train / scheme.n
    alt = full_train + ratio * _mean(v - t for v, t in zip(val, trn))
    scale = max(1.0, abs(full_train), *map(abs, val), *map(abs, trn), *map(abs, allr))
    if abs(value - alt) > FORM_RTOL * scale:
        raise StableCVError(f"corrected forms disagree: {value!r} vs {alt!r}")
    return RiskEstimate(value, True, val, trn, allr, scheme, full_train, alt)


def _full_train(learner, data):
    try:
        pred = learner.fit(data, np.arange(len(data)))
    except FitError as exc:
        exc.fold = None
        raise
    return pred, empirical_risk(pred, data)


def kfold_estimate(learner, data, scheme: FoldScheme, workers: int | None = 1) -> RiskEstimate:
    return _standard(scheme, fold_risks(learner, data, scheme, workers))


def corrected_kfold_estimate(learner, data, scheme: FoldScheme,
                             workers: int | None = 1) -> RiskEstimate:
    risks = fold_risks(learner, data, scheme, workers)
    return _corrected(scheme, risks, _full_train(learner, data)[1])


def estimate_both(learner, data, scheme: FoldScheme, workers: int | None = 1):
    """Standard and corrected estimates from a single set of K + 1 fits.

    Returns ``(standard, corrected, fold_predictors, full_predictor)``.
    """
    risks = fold_risks(learner, data, scheme, workers)
    full_pred, full_train = _full_train(learner, data)
    return (_standard(scheme, risks), _corrected(scheme, risks, full_train),
            [r.predictor for r in risks], full_pred)


@dataclass(frozen=True)
class Decomposition:
    """Error components of both estimators against the true risk of ``A([n])``.

    ``estimate - true_risk_full == d_cv + bias`` for the standard estimator
    and ``== d_all + (n_T/n) (d_cv - d_train)`` for the corrected one.
    """
    d_cv: float
    bias: float
    d_all: float
    d_train: float
    true_risk_full: float
    true_risk_folds: tuple
    standard: float
    corrected: float
    train_ratio: float

    def standard_residual(self) -> float:
        return (self.standard - self.true_risk_full) - (self.d_cv + self.bias)

    def corrected_residual(self) -> float:
        rhs = self.d_all + self.train_ratio * (self.d_cv - self.d_train)
        return (self.corrected - self.true_risk_full) - rhs

    def to_dict(self) -> dict:
        return {
            "d_cv": self.d_cv,
            "bias": self.bias,
            "d_all": self.d_all,
            "d_train": self.d_train,
            "true_risk_full": self.true_risk_full,
            "true_risk_folds": list(self.true_risk_folds),
            "standard": self.standard,
            "corrected": self.corrected,
            "standard_error": self.standard - self.true_risk_full,
            "corrected_error": self.corrected - self.true_risk_full,
        }


def decompose(learner, data, scheme: FoldScheme, oracle, workers: int | None = 1) -> Decomposition:
    """Split both estimation errors into deviation and bias terms via ``oracle.risk``."""
    std, corr, fold_preds, full_pred = estimate_both(learner, data, scheme, workers)
    true_folds = tuple(float(oracle.risk(p)) for p in fold_preds)
    true_full = float(oracle.risk(full_pred))
    mean_true = _mean(true_folds)
    d_cv = std.value - mean_true
    bias = mean_true - true_full
    d_all = corr.full_train - true_full
    d_train = _mean(t - r for t, r in zip(std.per_fold_train, true_folds))
    return Decomposition(d_cv, bias, d_all, d_train, true_full, true_folds,
                         std.value, corr.value, scheme.n_train / scheme.n)
