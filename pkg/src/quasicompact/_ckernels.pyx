# cython: language_level=3
"""Compiled versions of the loops in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, expm1, fabs, pow, INFINITY

cnp.import_array()


def m1_pair_max(values, double log_gamma):
    cdef double[::1] f = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0]
    cdef double[::1] log_gap = np.empty(max(n, 1))
    cdef Py_ssize_t i, j, best_i = -1, best_j = -1
    cdef double best = -INFINITY, d, val
    for i in range(1, n):
        log_gap[i] = log(-expm1(-i * log_gamma))
    for j in range(1, n):
        for i in range(j):
            d = fabs(f[i] - f[j])
            if d == 0.0:
                continue
            val = log(d) - j * log_gamma - log_gap[j - i]
            if val > best:
                best = val
                best_i = i
                best_j = j
    if best_i < 0:
        return 0.0, -1, -1
    return exp(best), best_i, best_j


def csr_power_history(const int[::1] indptr, const int[::1] indices, const double[::1] data,
                      x, int n_steps):
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef double[::1] cur = np.array(x, dtype=np.float64)
    cdef double[::1] nxt = np.empty(n_rows)
    out_arr = np.empty((n_steps + 1, n_rows))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, k, n
    cdef double acc
    for r in range(n_rows):
        out[0, r] = cur[r]
    for n in range(1, n_steps + 1):
        for r in range(n_rows):
            acc = 0.0
            for k in range(indptr[r], indptr[r + 1]):
                acc += data[k] * cur[indices[k]]
            nxt[r] = acc
        for r in range(n_rows):
            cur[r] = nxt[r]
            out[n, r] = nxt[r]
    return out_arr


def coupled_affine_moments(x1, x2, scale, shift, double exponent, double center):
    cdef double[::1] a0 = np.ascontiguousarray(x1, dtype=np.float64)
    cdef double[::1] b0 = np.ascontiguousarray(x2, dtype=np.float64)
    cdef double[:, ::1] s = np.ascontiguousarray(scale, dtype=np.float64)
    cdef double[:, ::1] t = np.ascontiguousarray(shift, dtype=np.float64)
    cdef Py_ssize_t n_paths = s.shape[0], n_steps = s.shape[1], k, n
    sums_arr = np.zeros(n_steps + 1)
    sq_arr = np.zeros(n_steps + 1)
    cdef double[::1] sums = sums_arr
    cdef double[::1] sums_sq = sq_arr
    cdef double a, b, delta, pw = exponent - 1.0
    for k in range(n_paths):
        a = a0[k]
        b = b0[k]
        for n in range(n_steps + 1):
            if n > 0:
                a = s[k, n - 1] * a + t[k, n - 1]
                b = s[k, n - 1] * b + t[k, n - 1]
            delta = fabs(a - b)
            if pw != 0.0:
                delta *= pow(2.0 + fabs(a - center) + fabs(b - center), pw)
            sums[n] += delta
            sums_sq[n] += delta * delta
    return sums_arr, sq_arr
