# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.  Mirrors ``_pykernels`` operation for operation."""
import numpy as np

from libc.math cimport log, sqrt
from libc.stdint cimport int64_t, uint64_t

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t sm_mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static inline uint64_t sm_next(uint64_t *state) {
        *state += 0x9E3779B97F4A7C15ULL;
        return sm_mix(*state);
    }
    static inline uint64_t sm_below(uint64_t *state, uint64_t m) {
        return (uint64_t)(((unsigned __int128)sm_next(state) * m) >> 64);
    }
    static inline double sm_random(uint64_t *state) {
        return (double)(sm_next(state) >> 11) * (1.0 / 9007199254740992.0);
    }
    static inline uint64_t sm_derive3(uint64_t a, uint64_t b, uint64_t c) {
        uint64_t h = 0x6A09E667F3BCC909ULL;
        h = sm_mix((h ^ a) + 0x9E3779B97F4A7C15ULL);
        h = sm_mix((h ^ b) + 0x9E3779B97F4A7C15ULL);
        h = sm_mix((h ^ c) + 0x9E3779B97F4A7C15ULL);
        return h;
    }
    """
    uint64_t sm_below(uint64_t *state, uint64_t m) nogil
    double sm_random(uint64_t *state) nogil
    uint64_t sm_derive3(uint64_t a, uint64_t b, uint64_t c) nogil

BACKEND = "cython"

cdef uint64_t _MASK = 0xFFFFFFFFFFFFFFFF


cdef inline uint64_t _u64(object v):
    return <uint64_t>(int(v) & 0xFFFFFFFFFFFFFFFF)


def draw_indices(seed, Py_ssize_t m, Py_ssize_t count):
    cdef uint64_t state = _u64(seed)
    out = np.empty(count, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t c
    with nogil:
        for c in range(count):
            o[c] = <int64_t>sm_below(&state, <uint64_t>m)
    return out


def cholesky(a):
    """Lower Cholesky factor; ``info`` is -1 on success else the failing pivot."""
    cdef const double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0]
    low = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] L = low
    cdef Py_ssize_t i, j, k
    cdef double s, d
    cdef Py_ssize_t info = -1
    with nogil:
        for j in range(n):
            s = A[j, j]
            for k in range(j):
                s = s - L[j, k] * L[j, k]
            if not s > 0.0:
                info = j
                break
            d = sqrt(s)
            L[j, j] = d
            for i in range(j + 1, n):
                s = A[i, j]
                for k in range(j):
                    s = s - L[i, k] * L[j, k]
                L[i, j] = s / d
    return low, info


def cho_solve(low, b):
    cdef const double[:, ::1] L = np.ascontiguousarray(low, dtype=np.float64)
    cdef const double[::1] B = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = L.shape[0]
    z_arr = np.empty(n)
    x_arr = np.empty(n)
    cdef double[::1] z = z_arr
    cdef double[::1] x = x_arr
    cdef Py_ssize_t i, k
    cdef double s
    with nogil:
        for i in range(n):
            s = B[i]
            for k in range(i):
                s = s - L[i, k] * z[k]
            z[i] = s / L[i, i]
        for i in range(n - 1, -1, -1):
            s = z[i]
            for k in range(i + 1, n):
                s = s - L[k, i] * x[k]
            x[i] = s / L[i, i]
    return x_arr


def sgd_quadratic(a, x, y, train, steps, seed):
    """SGD on l(w, (x, y)) = w'Aw/2 - y x'w, with-replacement sampling."""
    cdef const double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] X = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(y, dtype=np.float64)
    cdef const int64_t[::1] T = np.ascontiguousarray(train, dtype=np.int64)
    cdef const double[::1] S = np.ascontiguousarray(steps, dtype=np.float64)
    cdef Py_ssize_t d = A.shape[0]
    cdef uint64_t m = T.shape[0]
    cdef uint64_t state = _u64(seed)
    w_arr = np.zeros(d)
    g_arr = np.zeros(d)
    cdef double[::1] w = w_arr
    cdef double[::1] g = g_arr
    cdef Py_ssize_t step, r, c, i
    cdef double acc, alpha, yi
    with nogil:
        for step in range(S.shape[0]):
            alpha = S[step]
            i = T[sm_below(&state, m)]
            yi = Y[i]
            for r in range(d):
                acc = 0.0
                for c in range(d):
                    acc = acc + A[r, c] * w[c]
                g[r] = acc - yi * X[i, r]
            for r in range(d):
                w[r] = w[r] - alpha * g[r]
    return w_arr


def pegasos(x, y, train, double lam, Py_ssize_t n_steps, seed):
    """Projected stochastic subgradient on lam/2 |w|^2 + mean hinge."""
    cdef const double[:, ::1] X = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(y, dtype=np.float64)
    cdef const int64_t[::1] T = np.ascontiguousarray(train, dtype=np.int64)
    cdef Py_ssize_t d = X.shape[1]
    cdef uint64_t m = T.shape[0]
    cdef uint64_t state = _u64(seed)
    w_arr = np.zeros(d)
    cdef double[::1] w = w_arr
    cdef double radius2 = 1.0 / lam
    cdef double radius = 1.0 / sqrt(lam)
    cdef Py_ssize_t k, r, i
    cdef double eta, dot, margin, scale, step, nrm2, f, yi
    with nogil:
        for k in range(1, n_steps + 1):
            i = T[sm_below(&state, m)]
            yi = Y[i]
            eta = 1.0 / (lam * <double>k)
            dot = 0.0
            for r in range(d):
                dot = dot + w[r] * X[i, r]
            margin = yi * dot
            scale = 1.0 - eta * lam
            for r in range(d):
                w[r] = w[r] * scale
            if margin < 1.0:
                step = eta * yi
                for r in range(d):
                    w[r] = w[r] + step * X[i, r]
            nrm2 = 0.0
            for r in range(d):
                nrm2 = nrm2 + w[r] * w[r]
            if nrm2 > radius2:
                f = radius / sqrt(nrm2)
                for r in range(d):
                    w[r] = w[r] * f
    return w_arr


cdef inline double _theta(double[::1] signs, uint64_t m, Py_ssize_t hole,
                          Py_ssize_t nv, Py_ssize_t t, double alpha,
                          uint64_t seed) noexcept nogil:
    cdef uint64_t state = seed
    cdef double theta = 0.0
    cdef Py_ssize_t step, pos
    for step in range(t):
        pos = <Py_ssize_t>sm_below(&state, m)
        if hole >= 0 and pos >= hole:
            pos = pos + nv
        theta = theta + alpha * signs[pos]
    return theta


def sgd_counterexample(Py_ssize_t n, Py_ssize_t k, Py_ssize_t t,
                       Py_ssize_t replicates, seed, double p_plus):
    """Replicated K-fold run of SGD on the rank-deficient quadratic construction."""
    cdef Py_ssize_t nv = n // k
    cdef Py_ssize_t nt = n - nv
    cdef double alpha_n = log(<double>n) / <double>t
    cdef double alpha_t = log(<double>nt) / <double>t
    cdef double p_minus = 1.0 - p_plus
    cdef uint64_t base = _u64(seed)
    cv_a = np.empty(replicates)
    corr_a = np.empty(replicates)
    full_a = np.empty(replicates)
    fold_a = np.empty(replicates)
    sign_a = np.empty(n)
    cdef double[::1] cv = cv_a
    cdef double[::1] corr = corr_a
    cdef double[::1] full = full_a
    cdef double[::1] fold = fold_a
    cdef double[::1] signs = sign_a
    cdef Py_ssize_t r, i, j, lo
    cdef uint64_t state, algo
    cdef double s, ssum, sbar, th, thj, full_train, cv_sum, all_sum, risk_sum, vs, est
    with nogil:
        for r in range(replicates):
            state = sm_derive3(base, <uint64_t>r, 0)
            ssum = 0.0
            for i in range(n):
                if sm_random(&state) < p_plus:
                    s = 1.0
                else:
                    s = -1.0
                signs[i] = s
                ssum = ssum + s
            sbar = ssum / <double>n
            algo = sm_derive3(base, <uint64_t>r, 1)
            th = _theta(signs, <uint64_t>n, -1, nv, t, alpha_n, algo)
            full[r] = p_plus * (-th) + p_minus * th
            full_train = -(th * sbar)
            cv_sum = 0.0
            all_sum = 0.0
            risk_sum = 0.0
            for j in range(k):
                lo = j * nv
                thj = _theta(signs, <uint64_t>nt, lo, nv, t, alpha_t, algo)
                vs = 0.0
                for i in range(lo, lo + nv):
                    vs = vs + (-(signs[i] * thj))
                cv_sum = cv_sum + vs / <double>nv
                all_sum = all_sum + (-(thj * sbar))
                risk_sum = risk_sum + (p_plus * (-thj) + p_minus * thj)
            est = cv_sum / <double>k
            cv[r] = est
            corr[r] = est + full_train - all_sum / <double>k
            fold[r] = risk_sum / <double>k
    return cv_a, corr_a, full_a, fold_a
