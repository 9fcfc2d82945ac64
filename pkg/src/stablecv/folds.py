"""K-fold train/validation partitions and their balance invariants."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import FoldError
from .rng import SplitMix64

log = logging.getLogger(__name__)


def index_set(values) -> np.ndarray:
    """Freeze ``values`` as a read-only int64 array."""
    arr = np.array(values, dtype=np.int64).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Fold:
    train: np.ndarray
    validation: np.ndarray


@dataclass(frozen=True)
class FoldScheme:
    n: int
    k: int
    folds: tuple
    seed: int | None = None
    dropped: int = 0

    @property
    def n_validation(self) -> int:
        return self.n // self.k

    @property
    def n_train(self) -> int:
        return self.n - self.n // self.k

    def __len__(self):
        return len(self.folds)

    def __iter__(self):
        return iter(self.folds)

    def permuted(self, order) -> "FoldScheme":
        return FoldScheme(self.n, self.k, tuple(self.folds[j] for j in order),
                          self.seed, self.dropped)

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "folds": [{"train": f.train.tolist(), "validation": f.validation.tolist()}
                      for f in self.folds],
        }
        if self.dropped:
            out["dropped"] = self.dropped
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "FoldScheme":
        folds = tuple(Fold(index_set(f["train"]), index_set(f["validation"]))
                      for f in d["folds"])
        return cls(int(d["n"]), int(d["k"]), folds, d.get("seed"), int(d.get("dropped", 0)))

    @classmethod
    def from_json(cls, text: str) -> "FoldScheme":
        return cls.from_dict(json.loads(text))


def build_kfold(n: int, k: int, seed: int | None = None, *, truncate: bool = False) -> FoldScheme:
    """Partition ``range(n)`` into ``k`` equal validation blocks.

    Without a seed the blocks are contiguous in index order.  With a seed
    the indices are first shuffled by SplitMix64 (Fisher-Yates), then
    blocked; each block is stored sorted.

    ``truncate=True`` drops the ``n % k`` trailing indices instead of
    raising, and records the count in ``FoldScheme.dropped``.
    """
    n, k = int(n), int(k)
    if k < 2:
        raise FoldError(f"k must be >= 2, got {k}")
    if n < k:
        raise FoldError(f"need at least k={k} samples, got n={n}")
    dropped = n % k
    if dropped:
        if not truncate:
            raise FoldError(f"n not divisible by k (n={n}, k={k}); "
                            "every fold must have n/k validation points")
        log.warning("truncating %d trailing indices so that k=%d divides n", dropped, k)
        n -= dropped
    order = np.arange(n) if seed is None else np.array(SplitMix64(seed).permutation(n))
    nv = n // k
    everything = np.arange(n)
    folds = []
    for j in range(k):
        val = np.sort(order[j * nv:(j + 1) * nv])
        mask = np.ones(n, dtype=bool)
        mask[val] = False
        folds.append(Fold(index_set(everything[mask]), index_set(val)))
    return FoldScheme(n, k, tuple(folds), seed, dropped)


@dataclass(frozen=True)
class BalanceReport:
    """Outcome of :func:`verify_balance`; truthy iff every invariant holds."""
    ok: bool
    invariant: str | None = None
    fold: int | None = None
    detail: str = ""
    checked: tuple = field(default=())

    def __bool__(self):
        return self.ok


_CHECKS = ("fold_count", "index_set", "disjointness", "coverage",
           "cardinality", "complement", "balance")


def _fail(name, detail, fold=None):
    done = _CHECKS[:_CHECKS.index(name)]
    return BalanceReport(False, name, fold, detail, done)


def verify_balance(scheme: FoldScheme) -> BalanceReport:
    """Check every FoldScheme invariant; report the first one violated."""
    n, k = scheme.n, scheme.k
    if len(scheme.folds) != k or k < 2:
        return _fail("fold_count", f"expected {k} folds (k >= 2), found {len(scheme.folds)}")
    for j, f in enumerate(scheme.folds):
        for name, idx in (("train", f.train), ("validation", f.validation)):
            idx = np.asarray(idx)
            if idx.ndim != 1 or (idx.size and not np.issubdtype(idx.dtype, np.integer)):
                return _fail("index_set", f"{name} set is not a 1-D integer array", j)
            if idx.size and (idx[0] < 0 or idx[-1] >= n or np.any(np.diff(idx) <= 0)):
                return _fail("index_set", f"{name} set must be strictly increasing within [0, {n})", j)
    seen = np.zeros(n, dtype=np.int64)
    for j, f in enumerate(scheme.folds):
        v = np.asarray(f.validation)
        if np.any(seen[v] > 0):
            dup = int(v[seen[v] > 0][0])
            return _fail("disjointness", f"index {dup} appears in more than one validation set", j)
        seen[v] += 1
    if np.any(seen == 0):
        return _fail("coverage", f"index {int(np.flatnonzero(seen == 0)[0])} is in no validation set")
    if n % k:
        return _fail("cardinality", f"n={n} is not divisible by k={k}")
    nv = n // k
    for j, f in enumerate(scheme.folds):
        if len(f.validation) != nv or len(f.train) != n - nv:
            return _fail("cardinality",
                         f"|V|={len(f.validation)}, |T|={len(f.train)}; expected {nv} and {n - nv}", j)
    everything = np.arange(n)
    for j, f in enumerate(scheme.folds):
        if not np.array_equal(np.asarray(f.train), np.setdiff1d(everything, f.validation)):
            return _fail("complement", "train set is not the complement of the validation set", j)
    in_train = np.zeros(n, dtype=np.int64)
    for f in scheme.folds:
        in_train[np.asarray(f.train)] += 1
    # (1/K) sum_j 1{l in V_j} = n_V / n, compared in integers
    if np.any(seen * n != k * nv) or np.any(in_train * n != k * (n - nv)):
        return _fail("balance", "per-index membership frequencies differ from n_V/n, n_T/n")
    return BalanceReport(True, checked=_CHECKS)
