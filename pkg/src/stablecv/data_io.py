"""CSV loading, seeded train/test splits and z-score standardization."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError
from .learners import Dataset
from .rng import SplitMix64


@dataclass(frozen=True)
class CsvSchema:
    has_header: bool = True
    target_column: str | int = -1
    task: str = "regression"
    positive_label: str | None = None
    negative_label: str | None = None
    delimiter: str = ","

    def __post_init__(self):
        if self.task not in ("regression", "classification"):
            raise ValueError(f"task must be regression or classification, got {self.task!r}")
        if self.task == "classification" and self.positive_label is None:
            raise ValueError("classification needs positive_label")


def bundled(name: str) -> Path:
    """Path of a CSV shipped in ``stablecv/data``."""
    path = resources.files("stablecv") / "data" / name
    if not path.is_file():
        raise FileNotFoundError(f"no bundled dataset {name!r}")
    return Path(str(path))


def _target_index(header, target, width):
    if isinstance(target, str) and not target.lstrip("-").isdigit():
        if header is None:
            raise DataError(f"target column {target!r} given by name but the file has no header")
        if target not in header:
            raise DataError(f"target column {target!r} not in header {header}")
        return header.index(target)
    idx = int(target)
    if not -width <= idx < width:
        raise DataError(f"target column {idx} out of range for {width} columns")
    return idx % width


def load_csv(path, schema: CsvSchema = CsvSchema()) -> Dataset:
    """Read a numeric CSV; data rows are numbered from 1 in error messages."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=schema.delimiter) if r and any(c.strip() for c in r)]
    header = None
    if schema.has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in rows.pop(0)]
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(header) if header else len(rows[0])
    if width < 2:
        raise DataError(f"{path}: need at least one feature and a target column")
    tcol = _target_index(header, schema.target_column, width)
    names = header or [str(j) for j in range(width)]
    negative = schema.negative_label
    X = np.empty((len(rows), width - 1))
    y = np.empty(len(rows))
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"row {r}: expected {width} fields, found {len(row)}", row=r)
        feats = []
        for j, cell in enumerate(row):
            cell = cell.strip()
            if j == tcol and schema.task == "classification":
                if cell == schema.positive_label:
                    y[r - 1] = 1.0
                    continue
                if negative is None:
                    negative = cell
                if cell != negative:
                    raise DataError(f"row {r}, column {names[j]!r}: unknown label {cell!r}",
                                    row=r, column=names[j])
                y[r - 1] = -1.0
                continue
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"row {r}, column {names[j]!r}: not a number: {cell!r}",
                                row=r, column=names[j]) from None
            if not math.isfinite(value):
                raise DataError(f"row {r}, column {names[j]!r}: non-finite value {cell!r}",
                                row=r, column=names[j])
            if j == tcol:
                y[r - 1] = value
            else:
                feats.append(value)
        X[r - 1] = feats
    return Dataset(X, y)


def split_indices(n: int, test_fraction: float, seed: int):
    """Sorted ``(train, test)`` index arrays from a SplitMix64 shuffle."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n_test = math.floor(n * test_fraction + 0.5)
    if n_test < 1 or n - n_test < 2:
        raise ValueError(f"degenerate split: n={n}, test size {n_test}")
    perm = np.array(SplitMix64(seed).permutation(n), dtype=np.int64)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def split_train_test(data: Dataset, test_fraction: float = 1 / 3, seed: int = 0):
    train, test = split_indices(len(data), test_fraction, seed)
    return data.subset(train), data.subset(test)


@dataclass(frozen=True)
class StandardizationParams:
    mean: tuple
    scale: tuple
    constant: tuple

    def apply(self, data: Dataset) -> Dataset:
        mean, scale = np.array(self.mean), np.array(self.scale)
        Z = (data.X - mean) / scale
        Z[:, list(self.constant)] = 0.0
        return Dataset(Z, data.y)

    def to_dict(self) -> dict:
        return {"mean": list(self.mean), "scale": list(self.scale), "constant": list(self.constant)}

    @classmethod
    def from_dict(cls, d) -> "StandardizationParams":
        return cls(tuple(d["mean"]), tuple(d["scale"]), tuple(d["constant"]))


def standardize(train: Dataset, test: Dataset | None = None):
    """Z-score every feature with the training mean and (population) sd only.

    Constant training features become 0 in both sets.  Returns
    ``(train', test', params)``.
    """
    mean = train.X.mean(axis=0)
    sd = train.X.std(axis=0)
    constant = tuple(int(j) for j in np.flatnonzero(sd == 0.0))
    if constant:
        warnings.warn(f"zero-variance feature(s) {list(constant)} set to 0", stacklevel=2)
    scale = np.where(sd == 0.0, 1.0, sd)
    params = StandardizationParams(tuple(mean.tolist()), tuple(scale.tolist()), constant)
    return params.apply(train), (params.apply(test) if test is not None else None), params
