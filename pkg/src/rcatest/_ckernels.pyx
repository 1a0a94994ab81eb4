# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: the RCAR recursion and the randomisation counts.

Contracts match ``rcatest._pykernels`` exactly; see that module for the
documentation.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


def rcar_path(coef, innov, double x0):
    cdef const double[::1] a = np.ascontiguousarray(coef, dtype=np.float64)
    cdef const double[::1] e = np.ascontiguousarray(innov, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    if e.shape[0] != n:
        raise ValueError("coef and innov must have the same length")
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double x = x0
    cdef Py_ssize_t t
    cdef long long overflow = -1
    with nogil:
        for t in range(n):
            x = a[t] * x + e[t]
            if not isfinite(x):
                overflow = t + 1
                break
            out[t] = x
    return out_arr, overflow


def threshold_counts(xi, thresholds):
    cdef const double[:, ::1] z = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const double[::1] thr = np.ascontiguousarray(thresholds, dtype=np.float64)
    cdef Py_ssize_t rows = z.shape[0], r = z.shape[1], k = thr.shape[0]
    out_arr = np.zeros((rows, k), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, m
    cdef double t
    cdef long long c
    with nogil:
        for i in range(rows):
            for m in range(k):
                # branchless count: thresholds sit near the median of xi
                t = thr[m]
                c = 0
                for j in range(r):
                    c += z[i, j] <= t
                out[i, m] = c
    return out_arr
