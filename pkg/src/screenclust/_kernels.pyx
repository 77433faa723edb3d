# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: HOG cell voting, nearest-centroid assignment,
regression-tree split search. Mirrors ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

IMPL = "cython"


def cell_histograms(double[:, ::1] mag, int[:, ::1] bin_lo,
                    double[:, ::1] frac_hi, int cell, int bins):
    cdef Py_ssize_t h = mag.shape[0], w = mag.shape[1]
    cdef Py_ssize_t cy = h // cell, cx = w // cell
    hist_arr = np.zeros((cy, cx, bins), dtype=np.float64)
    cdef double[:, :, ::1] hist = hist_arr
    cdef Py_ssize_t i, j
    cdef int lo, hi
    cdef double m, f
    for i in range(h):
        for j in range(w):
            m = mag[i, j]
            f = frac_hi[i, j]
            lo = bin_lo[i, j]
            hi = lo + 1
            if hi == bins:
                hi = 0
            hist[i // cell, j // cell, lo] += m * (1.0 - f)
            hist[i // cell, j // cell, hi] += m * f
    return hist_arr


def assign_nearest(double[:, ::1] points, double[:, ::1] centroids):
    cdef Py_ssize_t n = points.shape[0], d = points.shape[1]
    cdef Py_ssize_t k = centroids.shape[0]
    labels_arr = np.empty(n, dtype=np.int64)
    sqd_arr = np.empty(n, dtype=np.float64)
    cdef long long[::1] labels = labels_arr
    cdef double[::1] sqd = sqd_arr
    cdef Py_ssize_t i, j, c
    cdef double best, dist, diff
    cdef long long best_c
    for i in range(n):
        best = INFINITY
        best_c = 0
        for c in range(k):
            dist = 0.0
            for j in range(d):
                diff = points[i, j] - centroids[c, j]
                dist += diff * diff
            if dist < best:
                best = dist
                best_c = c
        labels[i] = best_c
        sqd[i] = best
    return labels_arr, sqd_arr


def best_split(double[:, ::1] x, double[::1] g, double[::1] h,
               int min_leaf, double lam):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef double total_g = 0.0, total_h = 0.0
    cdef Py_ssize_t i, j, r
    for i in range(n):
        total_g += g[i]
        total_h += h[i]
    cdef double parent = total_g * total_g / (total_h + lam)

    cdef long long best_feat = -1
    cdef double best_thr = 0.0, best_gain = 0.0
    cdef double gl, hl, gr, hr, gain, xs_r, xs_next
    cdef long long[::1] order
    col = np.empty(n, dtype=np.float64)
    cdef double[::1] colv = col
    for j in range(d):
        for i in range(n):
            colv[i] = x[i, j]
        order = np.argsort(col, kind="stable")
        gl = 0.0
        hl = 0.0
        for r in range(n - 1):
            i = order[r]
            gl += g[i]
            hl += h[i]
            xs_r = x[i, j]
            xs_next = x[order[r + 1], j]
            if xs_r == xs_next:
                continue
            if r + 1 < min_leaf or n - r - 1 < min_leaf:
                continue
            gr = total_g - gl
            hr = total_h - hl
            gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent
            if gain > best_gain + 1e-12:
                best_gain = gain
                best_feat = j
                best_thr = 0.5 * (xs_r + xs_next)
    return best_feat, best_thr, best_gain
