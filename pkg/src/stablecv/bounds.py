"""High-probability error bounds for K-fold estimates of stable learners.

Conventions: ``beta_t`` is the uniform stability of the learner trained on
``t`` points, ``L`` bounds the loss, ``C`` is a constant with
``beta_t <= C/t``, ``delta`` is the failure probability and
``n_T = n (K-1)/K``.  Every function returns the bound only; constants are
never absorbed.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class BoundInputs:
    n: int
    k: int
    delta: float = 0.05
    big_l: float = 1.0
    c: float = 1.0
    m_const: float | None = None
    model_count: int = 1
    beta_sequence: Any = None

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.n < self.k:
            raise ValueError(f"n={self.n} is smaller than k={self.k}")
        if self.big_l <= 0 or self.c <= 0:
            raise ValueError("L and C must be positive")
        if self.model_count < 1:
            raise ValueError("model_count must be >= 1")
        if self.m_const is not None and self.m_const <= 0:
            raise ValueError("M must be positive")

    @property
    def n_train(self) -> float:
        return self.n * (self.k - 1) / self.k

    def beta(self, i: int) -> float:
        """``beta_i`` from ``beta_sequence`` (callable, mapping, or 1-based sequence)."""
        seq = self.beta_sequence
        if seq is None:
            raise ValueError("no beta_sequence supplied")
        if isinstance(seq, Callable):
            return float(seq(i))
        if isinstance(seq, Mapping):
            if i not in seq:
                raise ValueError(f"beta_sequence has no entry for t={i}")
            return float(seq[i])
        if isinstance(seq, Sequence) or hasattr(seq, "__getitem__"):
            if not 1 <= i <= len(seq):
                raise ValueError(f"beta_sequence has no entry for t={i}")
            return float(seq[i - 1])
        raise TypeError("beta_sequence must be callable, a mapping or a sequence")


def deviation(n: float, delta: float) -> float:
    """``sqrt(log(1/delta) / (2n))``."""
    return math.sqrt(math.log(1.0 / delta) / (2.0 * n))


def _integer_n_train(inp: BoundInputs) -> int:
    if inp.n % inp.k:
        raise ValueError(f"the sequence form needs k | n (n={inp.n}, k={inp.k})")
    return inp.n - inp.n // inp.k


def kfold_upper_bound_generic(inp: BoundInputs) -> float:
    """``sum_{i=n_T+1}^{n} beta_i + (4 beta_{n_T} n_T + 2L) dev``."""
    nt = _integer_n_train(inp)
    bias = math.fsum(inp.beta(i) for i in range(nt + 1, inp.n + 1))
    return bias + (4 * inp.beta(nt) * nt + 2 * inp.big_l) * deviation(inp.n, inp.delta)


def kfold_upper_bound(inp: BoundInputs) -> float:
    """``C log(K/(K-1)) + (4C + 2L) dev``; the first term does not vanish with ``n``."""
    return (inp.c * math.log(inp.k / (inp.k - 1))
            + (4 * inp.c + 2 * inp.big_l) * deviation(inp.n, inp.delta))


def corrected_upper_bound(inp: BoundInputs, form: str = "auto") -> float:
    """Bound for the corrected estimator; holds with probability ``1 - 6 delta``.

    ``form="constant"``: ``6C/n + 3(4C + 2L) dev``.
    ``form="sequence"``: ``2(beta_n + beta_{n_T}) + 3(4 beta_{n_T} n_T + 2L) dev``.
    ``"auto"`` uses the sequence form when ``beta_sequence`` is set.
    """
    if form == "auto":
        form = "sequence" if inp.beta_sequence is not None else "constant"
    dev = deviation(inp.n, inp.delta)
    if form == "constant":
        return 6 * inp.c / inp.n + 3 * (4 * inp.c + 2 * inp.big_l) * dev
    if form == "sequence":
        nt = _integer_n_train(inp)
        b_nt = inp.beta(nt)
        return 2 * (inp.beta(inp.n) + b_nt) + 3 * (4 * b_nt * nt + 2 * inp.big_l) * dev
    raise ValueError(f"unknown form {form!r}")


def model_selection_bound(inp: BoundInputs) -> float:
    """Excess risk of corrected-K-fold selection over ``model_count`` models with common constant ``M``.

    ``12M/n + 6(4M + 2L) sqrt(log(|models|/delta)/n)``.
    """
    if inp.m_const is None:
        raise ValueError("model_selection_bound needs m_const")
    m = inp.m_const
    return 12 * m / inp.n + 6 * (4 * m + 2 * inp.big_l) * math.sqrt(
        math.log(inp.model_count / inp.delta) / inp.n)


def kfold_lower_bounds(inp: BoundInputs) -> dict:
    """Bias floors of the two constructions.

    ``rerm = 2 log(K/(K-1)) (1 - 1/M)`` and ``sgd = log(K/(K-1))/3``.
    """
    if inp.m_const is None:
        raise ValueError("kfold_lower_bounds needs m_const")
    lk = math.log(inp.k / (inp.k - 1))
    return {"rerm": 2 * lk * (1 - 1 / inp.m_const), "sgd": lk / 3}


def power_law_sequence(profile) -> Callable[[int], float]:
    """``beta(t) = a t^b`` fitted to a stability profile, for the sequence forms."""
    pts = [(math.log(e.n_train), math.log(e.beta_hat)) for e in profile.entries
           if e.beta_hat > 0 and math.isfinite(e.beta_hat)]
    if len(pts) == 1:
        (x, y), = pts
        return lambda t: math.exp(y) * math.exp(x) / t
    if not pts:
        return lambda t: 0.0
    slope = profile.fit_exponent
    intercept = math.fsum(y - slope * x for x, y in pts) / len(pts)
    return lambda t: math.exp(intercept) * t ** slope
