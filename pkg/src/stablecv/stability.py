"""Empirical leave-one-out stability measurements.

For each training size the probe compares ``A(T)`` with ``A(T minus i)`` on
fresh evaluation points and keeps the largest absolute loss change seen.
The result is a measured lower-bound witness for the stability constant:
it maximises over sampled perturbations only and certifies nothing.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError
from .learners import sgd_step_sizes
from .parallel import ordered_map
from .rng import SplitMix64, derive_seed

log = logging.getLogger(__name__)

LABEL = "measured lower-bound witness (max over sampled removals and points; not a certified constant)"


@dataclass(frozen=True)
class StabilityEntry:
    n_train: int
    beta_hat: float
    trials: int
    failures: int = 0
    se: float = 0.0


@dataclass(frozen=True)
class StabilityProfile:
    entries: tuple
    fit_exponent: float | None
    randomized: bool = False
    inner_reps: int = 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n_T", "beta_hat", "trials"])
        for e in self.entries:
            w.writerow([e.n_train, repr(e.beta_hat), e.trials])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "label": LABEL,
            "randomized": self.randomized,
            "inner_reps": self.inner_reps,
            "fit_exponent": self.fit_exponent,
            "entries": [dataclasses.asdict(e) for e in self.entries],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def fit_exponent(sizes, betas) -> float | None:
    """Least-squares slope of ``log beta`` against ``log n``; ``None`` if under two positive points."""
    pts = [(math.log(n), math.log(b)) for n, b in zip(sizes, betas) if b > 0]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def _removal_set(m: int, removals: int | None, seed: int):
    if removals is None or removals >= m:
        return range(m)
    return sorted(SplitMix64(seed).permutation(m)[:removals])


def _with_seed(learner, seed):
    if getattr(learner, "stochastic", False):
        return dataclasses.replace(learner, seed=seed)
    return learner


def _trial(learner, sampler, m, trial, eval_points, removals, seed, inner_reps):
    """Largest |mean_r (l(A_r(T), o) - l(A_r(T minus i), o))| and its standard error."""
    data = sampler.sample(m, derive_seed(seed, m, trial, 0))
    ev = sampler.sample(eval_points, derive_seed(seed, m, trial, 1))
    everyone = np.arange(m)
    reps = [_with_seed(learner, derive_seed(seed, m, trial, 2, r)) for r in range(inner_reps)]
    base = np.array([rep.fit(data, everyone).losses(ev.X, ev.y) for rep in reps])
    best, best_se = 0.0, 0.0
    for i in _removal_set(m, removals, derive_seed(seed, m, trial, 3)):
        keep = np.delete(everyone, i)
        diffs = base - np.array([rep.fit(data, keep).losses(ev.X, ev.y) for rep in reps])
        avg = np.abs(diffs.mean(axis=0))
        j = int(np.argmax(avg))
        if avg[j] > best:
            best = float(avg[j])
            best_se = float(np.std(diffs[:, j], ddof=1) / math.sqrt(inner_reps)) if inner_reps > 1 else 0.0
    return best, best_se


def _probe(learner, sampler, sizes, trials, eval_points, seed, removals, inner_reps, workers):
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if inner_reps < 1:
        raise ValueError("inner_reps must be >= 1")
    sizes = sorted(int(s) for s in sizes)
    if not sizes or sizes[0] < 2:
        raise ValueError("every training size must be >= 2")
    entries = []
    for m in sizes:
        def run(trial, m=m):
            try:
                return _trial(learner, sampler, m, trial, eval_points, removals, seed, inner_reps)
            except FitError as exc:
                log.warning("stability trial %d at n_T=%d failed: %s", trial, m, exc)
                return None

        results = ordered_map(run, range(trials), workers)
        ok = [r for r in results if r is not None]
        if ok:
            beta, se = max(ok, key=lambda r: r[0])
        else:
            beta, se = math.nan, math.nan
        entries.append(StabilityEntry(m, beta, trials, trials - len(ok), se))
    good = [e for e in entries if math.isfinite(e.beta_hat)]
    return StabilityProfile(tuple(entries),
                            fit_exponent([e.n_train for e in good], [e.beta_hat for e in good]),
                            inner_reps > 1, inner_reps)


def probe_stability(learner, sampler, sizes, trials: int = 1, eval_points: int = 64,
                    seed: int = 0, removals: int | None = None,
                    workers: int | None = 1) -> StabilityProfile:
    """Max leave-one-out loss change per training size.

    ``sampler.sample(n, seed)`` supplies both the training sets and the
    evaluation points (fresh per trial).  ``removals`` caps how many
    indices are removed per trial (default: all of them).
    """
    return _probe(learner, sampler, sizes, trials, eval_points, seed, removals, 1, workers)


def probe_randomized_stability(learner, sampler, sizes, trials: int = 1, inner_reps: int = 32,
                               eval_points: int = 64, seed: int = 0,
                               removals: int | None = None,
                               workers: int | None = 1) -> StabilityProfile:
    """Like :func:`probe_stability` for randomized learners.

    The loss difference is averaged over ``inner_reps`` algorithm seeds
    before taking its absolute value.  Both fits in a pair use the same
    seed.  ``se`` is the standard error of that average at the maximiser.
    """
    return _probe(learner, sampler, sizes, trials, eval_points, seed, removals, inner_reps, workers)


def declared_ceiling(spec, n_train: int) -> float | None:
    """Proved stability ceiling at training size ``n_train``, if ``spec`` declares one.

    ``sgd_quadratic``: ``3 sum(alpha) / (n_T - 1)``.  Otherwise
    ``stability_constant / n_T`` when a constant is declared.
    """
    if getattr(spec, "kind", None) == "sgd_quadratic":
        return 3 * math.fsum(sgd_step_sizes(spec, n_train)) / (n_train - 1)
    c = getattr(spec, "stability_constant", None)
    return None if c is None else c / n_train
