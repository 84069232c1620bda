# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernel: squared norms and all unordered pair dot
products of float32 row vectors, accumulated in float64."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def pair_stats(const float[:, ::1] mat):
    cdef Py_ssize_t n = mat.shape[0]
    cdef Py_ssize_t d = mat.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sq = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dots = np.empty(n * (n - 1) // 2, dtype=np.float64)
    cdef double[:] sq_v = sq
    cdef double[:] dots_v = dots
    cdef Py_ssize_t i, j, k, idx
    cdef double acc

    for i in range(n):
        acc = 0.0
        for k in range(d):
            acc += <double>mat[i, k] * <double>mat[i, k]
        sq_v[i] = acc

    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                acc += <double>mat[i, k] * <double>mat[j, k]
            dots_v[idx] = acc
            idx += 1
    return sq, dots
