# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: fused Mahalanobis / weighted-moment passes.

Mirrors the contracts of ``femda._kernels_np``. Each routine makes a single
pass over the data rows, so the temporaries and per-call dispatch overhead of
the vectorized fallback are avoided. The triangular factor is inverted once
per call (m is small); the per-row work is then a dependency-free triangular
mat-vec that compilers vectorize.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log1p, sqrt

cnp.import_array()


cdef void _invert_lower(const double[:, ::1] L, double[:, ::1] Linv,
                        Py_ssize_t m) noexcept nogil:
    # Solve L @ Linv = I by forward substitution, column by column.
    cdef Py_ssize_t c, j, k
    cdef double s
    for c in range(m):
        for j in range(m):
            Linv[j, c] = 0.0
        Linv[c, c] = 1.0 / L[c, c]
        for j in range(c + 1, m):
            s = 0.0
            for k in range(c, j):
                s -= L[j, k] * Linv[k, c]
            Linv[j, c] = s / L[j, j]


cdef inline double _row_maha(const double[:, ::1] X, const double[::1] mu,
                             const double[:, ::1] Linv, double[::1] xc,
                             Py_ssize_t i, Py_ssize_t m) noexcept nogil:
    # d = ||Linv (x_i - mu)||^2 via a triangular mat-vec.
    cdef Py_ssize_t j, k
    cdef double s, d = 0.0
    for j in range(m):
        xc[j] = X[i, j] - mu[j]
    for j in range(m):
        s = 0.0
        for k in range(j + 1):
            s += Linv[j, k] * xc[k]
        d += s * s
    return d


def maha_sq_chol(const double[:, ::1] X, const double[::1] mu,
                 const double[:, ::1] L):
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1], i
    out_arr = np.empty(n, dtype=np.float64)
    linv_arr = np.empty((m, m), dtype=np.float64)
    xc_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr, xc = xc_arr
    cdef double[:, ::1] Linv = linv_arr
    with nogil:
        _invert_lower(L, Linv, m)
        for i in range(n):
            out[i] = _row_maha(X, mu, Linv, xc, i, m)
    return out_arr


def fp_step(const double[:, ::1] X, const double[::1] mu,
            const double[:, ::1] L, int mode, double cap):
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1], i, j, k
    cdef double d, ws, wl, wsum = 0.0
    wx_arr = np.zeros(m, dtype=np.float64)
    S_arr = np.zeros((m, m), dtype=np.float64)
    linv_arr = np.empty((m, m), dtype=np.float64)
    xc_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] wx = wx_arr, xc = xc_arr
    cdef double[:, ::1] S = S_arr, Linv = linv_arr
    with nogil:
        _invert_lower(L, Linv, m)
        for i in range(n):
            d = _row_maha(X, mu, Linv, xc, i, m)
            ws = 1.0 / d
            if ws > cap:
                ws = cap
            if mode == 1:
                wl = 1.0 / sqrt(d)
                if wl > cap:
                    wl = cap
            else:
                wl = ws
            wsum += wl
            for j in range(m):
                wx[j] += wl * X[i, j]
            # lower triangle only; mirrored below
            for j in range(m):
                for k in range(j + 1):
                    S[j, k] += ws * xc[j] * xc[k]
        for j in range(m):
            for k in range(j):
                S[k, j] = S[j, k]
    return wsum, wx_arr, S_arr


def tqda_moments(const double[:, ::1] X, const double[::1] mu,
                 const double[::1] d, double nu):
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1], i, j, k
    cdef double w, wsum = 0.0
    wx_arr = np.zeros(m, dtype=np.float64)
    S_arr = np.zeros((m, m), dtype=np.float64)
    xc_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] wx = wx_arr, xc = xc_arr
    cdef double[:, ::1] S = S_arr
    with nogil:
        for i in range(n):
            w = 1.0 / (nu + d[i])
            wsum += w
            for j in range(m):
                xc[j] = X[i, j] - mu[j]
                wx[j] += w * X[i, j]
            for j in range(m):
                for k in range(j + 1):
                    S[j, k] += w * xc[j] * xc[k]
        for j in range(m):
            for k in range(j):
                S[k, j] = S[j, k]
    return wsum, wx_arr, S_arr


def sum_log1p_div(const double[::1] d, double nu):
    cdef Py_ssize_t i, n = d.shape[0]
    cdef double acc = 0.0
    with nogil:
        for i in range(n):
            acc += log1p(d[i] / nu)
    return acc
