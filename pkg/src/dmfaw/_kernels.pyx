# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Fused elementwise kernels for the multiplicative updates.

Each function mirrors its twin in `_kernels_np` but runs in one pass with
no temporaries. Shape checking happens in `dmfaw.backend`.
"""

from libc.math cimport fabs, sqrt

import numpy as np


def mu_update(double[:, ::1] g, double[:, ::1] cross,
              double[:, ::1] gram_pos, double[:, ::1] gram_neg,
              double floor):
    cdef Py_ssize_t n0 = g.shape[0], n1 = g.shape[1], i, j
    cdef double a, num, den
    out_arr = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(n0):
        for j in range(n1):
            a = cross[i, j]
            num = 0.5 * (fabs(a) + a) + gram_neg[i, j]
            den = 0.5 * (fabs(a) - a) + gram_pos[i, j]
            if den < floor:
                den = floor
            out[i, j] = g[i, j] * sqrt(num / den)
    return out_arr


def mu_update_anchored(double[:, ::1] g, double[:, ::1] cross,
                       double[:, ::1] gram_pos, double[:, ::1] gram_neg,
                       double[:, ::1] anchor, double scale, double floor):
    cdef Py_ssize_t n0 = g.shape[0], n1 = g.shape[1], i, j
    cdef double a, c, num, den
    out_arr = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(n0):
        for j in range(n1):
            a = cross[i, j]
            c = anchor[i, j]
            num = 0.5 * (fabs(a) + a) + gram_neg[i, j] \
                + scale * 0.5 * (fabs(c) + c)
            den = 0.5 * (fabs(a) - a) + gram_pos[i, j] \
                + scale * 0.5 * (fabs(c) - c)
            if den < floor:
                den = floor
            out[i, j] = g[i, j] * sqrt(num / den)
    return out_arr


def row_sq_sums(double[:, ::1] a):
    cdef Py_ssize_t n0 = a.shape[0], n1 = a.shape[1], i, j
    cdef double acc
    out_arr = np.empty(n0, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n0):
        acc = 0.0
        for j in range(n1):
            acc += a[i, j] * a[i, j]
        out[i] = acc
    return out_arr


def weighted_sq_norm(double[::1] w, double[:, ::1] a):
    cdef Py_ssize_t n0 = a.shape[0], n1 = a.shape[1], i, j
    cdef double acc, total = 0.0
    for i in range(n0):
        acc = 0.0
        for j in range(n1):
            acc += a[i, j] * a[i, j]
        total += w[i] * w[i] * acc
    return total
