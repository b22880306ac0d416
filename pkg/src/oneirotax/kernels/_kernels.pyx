# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: Prim MST over the mutual-reachability graph and the
k-means assignment step. Pure-numpy fallbacks live in _kernels_py."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def mst_prim(points, core):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] X = \
        np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] C = \
        np.ascontiguousarray(core, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] edges = \
        np.empty((n - 1, 3), dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] in_tree = \
        np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] best = \
        np.full(n, INFINITY, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] best_from = \
        np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t current = 0, step, i, j, nxt
    cdef double dist, diff, reach, lo, cc

    in_tree[0] = 1
    for step in range(n - 1):
        cc = C[current]
        for i in range(n):
            if in_tree[i]:
                continue
            dist = 0.0
            for j in range(d):
                diff = X[i, j] - X[current, j]
                dist += diff * diff
            dist = sqrt(dist)
            reach = dist
            if C[i] > reach:
                reach = C[i]
            if cc > reach:
                reach = cc
            if reach < best[i]:
                best[i] = reach
                best_from[i] = current
        lo = INFINITY
        nxt = -1
        for i in range(n):
            if not in_tree[i] and best[i] < lo:
                lo = best[i]
                nxt = i
        edges[step, 0] = <double>best_from[nxt]
        edges[step, 1] = <double>nxt
        edges[step, 2] = best[nxt]
        in_tree[nxt] = 1
        current = nxt
    return edges


def kmeans_assign(points, centers):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] X = \
        np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] M = \
        np.ascontiguousarray(centers, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t k = M.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] labels = \
        np.empty(n, dtype=np.int64)
    cdef Py_ssize_t i, j, c, arg
    cdef double inertia = 0.0, lo, dist, diff

    for i in range(n):
        lo = INFINITY
        arg = 0
        for c in range(k):
            dist = 0.0
            for j in range(d):
                diff = X[i, j] - M[c, j]
                dist += diff * diff
            if dist < lo:
                lo = dist
                arg = c
        labels[i] = arg
        inertia += lo
    return labels, inertia
