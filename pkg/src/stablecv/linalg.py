"""Dense symmetric-positive-definite solves.

Small systems (ridge normal equations) go through the kernel Cholesky,
where call overhead dominates.  Large ones (kernel Gram matrices) use
LAPACK ``dpotrf``/``dpotrs``, which also reports the failing pivot.
Neither path adds jitter: a non-positive pivot raises.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import lapack

from . import kernels
from .errors import SingularSystemError

LAPACK_THRESHOLD = 96


def cholesky_factor(a: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == a``."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise SingularSystemError("matrix has non-finite entries")
    if a.shape[0] > LAPACK_THRESHOLD:
        c, info = lapack.dpotrf(a, lower=1, clean=1)
        if info > 0:
            pivot = info - 1
            raise SingularSystemError(
                f"matrix is not positive definite (pivot {pivot})", pivot=pivot)
        if info < 0:
            raise ValueError(f"dpotrf: illegal argument {-info}")
        return c
    low, info = kernels.cholesky(a)
    if info >= 0:
        raise SingularSystemError(
            f"matrix is not positive definite (pivot {info})", pivot=info)
    return low


def cholesky_solve(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if low.shape[0] > LAPACK_THRESHOLD:
        x, info = lapack.dpotrs(low, b, lower=1)
        if info != 0:
            raise ValueError(f"dpotrs: illegal argument {-info}")
        return x
    return kernels.cho_solve(low, b)


def spd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return cholesky_solve(cholesky_factor(a), b)
