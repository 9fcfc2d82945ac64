"""Pure-Python kernels (fallback for ``_ckernels``).

The PRNG, SGD, Pegasos and counterexample loops follow the compiled
module operation for operation, so both backends return bit-identical
results.  The Cholesky routines are numpy-vectorised and agree with the
compiled ones to rounding.
"""
from __future__ import annotations

import math

import numpy as np

from .rng import GOLDEN, MASK64, TWO_POW_M53, derive_seed, mix64

BACKEND = "python"


def draw_indices(seed: int, m: int, count: int) -> np.ndarray:
    state = int(seed) & MASK64
    out = np.empty(count, dtype=np.int64)
    for c in range(count):
        state = (state + GOLDEN) & MASK64
        out[c] = (mix64(state) * m) >> 64
    return out


def cholesky(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Lower Cholesky factor; ``info`` is -1 on success else the failing pivot."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        s = a[j, j] - low[j, :j] @ low[j, :j]
        if not s > 0.0:
            return low, j
        d = math.sqrt(s)
        low[j, j] = d
        if j + 1 < n:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / d
    return low, -1


def cho_solve(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = low.shape[0]
    z = np.empty(n)
    for i in range(n):
        z[i] = (b[i] - low[i, :i] @ z[:i]) / low[i, i]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        x[i] = (z[i] - low[i + 1:, i] @ x[i + 1:]) / low[i, i]
    return x


def sgd_quadratic(a, x, y, train, steps, seed) -> np.ndarray:
    """SGD on l(w, (x, y)) = w'Aw/2 - y x'w, with-replacement sampling."""
    a = np.asarray(a, dtype=np.float64).tolist()
    xs = np.asarray(x, dtype=np.float64).tolist()
    ys = np.asarray(y, dtype=np.float64).tolist()
    tr = [int(i) for i in train]
    m = len(tr)
    d = len(a)
    w = [0.0] * d
    g = [0.0] * d
    state = int(seed) & MASK64
    for alpha in np.asarray(steps, dtype=np.float64).tolist():
        state = (state + GOLDEN) & MASK64
        i = tr[(mix64(state) * m) >> 64]
        xi = xs[i]
        yi = ys[i]
        for r in range(d):
            acc = 0.0
            row = a[r]
            for c in range(d):
                acc += row[c] * w[c]
            g[r] = acc - yi * xi[r]
        for r in range(d):
            w[r] = w[r] - alpha * g[r]
    return np.array(w)


def pegasos(x, y, train, lam, n_steps, seed) -> np.ndarray:
    """Projected stochastic subgradient on lam/2 |w|^2 + mean hinge."""
    xs = np.asarray(x, dtype=np.float64).tolist()
    ys = np.asarray(y, dtype=np.float64).tolist()
    tr = [int(i) for i in train]
    m = len(tr)
    d = len(xs[0])
    lam = float(lam)
    w = [0.0] * d
    radius2 = 1.0 / lam
    radius = 1.0 / math.sqrt(lam)
    state = int(seed) & MASK64
    for k in range(1, n_steps + 1):
        state = (state + GOLDEN) & MASK64
        i = tr[(mix64(state) * m) >> 64]
        xi = xs[i]
        yi = ys[i]
        eta = 1.0 / (lam * k)
        dot = 0.0
        for r in range(d):
            dot += w[r] * xi[r]
        margin = yi * dot
        scale = 1.0 - eta * lam
        for r in range(d):
            w[r] = w[r] * scale
        if margin < 1.0:
            step = eta * yi
            for r in range(d):
                w[r] = w[r] + step * xi[r]
        nrm2 = 0.0
        for r in range(d):
            nrm2 += w[r] * w[r]
        if nrm2 > radius2:
            f = radius / math.sqrt(nrm2)
            for r in range(d):
                w[r] = w[r] * f
    return np.array(w)


def _theta(signs, m, hole, nv, t, alpha, seed):
    state = seed
    theta = 0.0
    for _ in range(t):
        state = (state + GOLDEN) & MASK64
        pos = (mix64(state) * m) >> 64
        if hole >= 0 and pos >= hole:
            pos += nv
        theta += alpha * signs[pos]
    return theta


def sgd_counterexample(n, k, t, replicates, seed, p_plus):
    """Replicated K-fold run of SGD on the rank-deficient quadratic construction.

    Tracks only the coordinate of w along v (the orthogonal part stays 0).
    Returns per-replicate arrays: standard estimate, corrected estimate,
    true risk of the full-data model and mean true risk of the fold models.
    """
    nv = n // k
    nt = n - nv
    alpha_n = math.log(n) / t
    alpha_t = math.log(nt) / t
    p_minus = 1.0 - p_plus
    cv = np.empty(replicates)
    corr = np.empty(replicates)
    full_risk = np.empty(replicates)
    fold_risk = np.empty(replicates)
    signs = [0.0] * n
    for r in range(replicates):
        state = derive_seed(seed, r, 0)
        ssum = 0.0
        for i in range(n):
            state = (state + GOLDEN) & MASK64
            s = 1.0 if (mix64(state) >> 11) * TWO_POW_M53 < p_plus else -1.0
            signs[i] = s
            ssum += s
        sbar = ssum / n
        algo = derive_seed(seed, r, 1)
        th = _theta(signs, n, -1, nv, t, alpha_n, algo)
        risk_n = p_plus * (-th) + p_minus * th
        full_train = -(th * sbar)
        cv_sum = 0.0
        all_sum = 0.0
        risk_sum = 0.0
        for j in range(k):
            lo = j * nv
            thj = _theta(signs, nt, lo, nv, t, alpha_t, algo)
            vs = 0.0
            for i in range(lo, lo + nv):
                vs += -(signs[i] * thj)
            cv_sum += vs / nv
            all_sum += -(thj * sbar)
            risk_sum += p_plus * (-thj) + p_minus * thj
        est = cv_sum / k
        cv[r] = est
        corr[r] = est + full_train - all_sum / k
        full_risk[r] = risk_n
        fold_risk[r] = risk_sum / k
    return cv, corr, full_risk, fold_risk
