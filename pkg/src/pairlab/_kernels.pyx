# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event-stream kernels; see _pykernels for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()

NAME = "cython"


def lag_histogram(const int64_t[::1] a, const int64_t[::1] b,
                  int64_t max_lag, int64_t bin_width, Py_ssize_t n_bins):
    cdef cnp.ndarray[int64_t, ndim=1] out = np.zeros(n_bins, dtype=np.int64)
    cdef int64_t[::1] counts = out
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef Py_ssize_t i, j, lo = 0
    cdef int64_t ta, d
    with nogil:
        for i in range(na):
            ta = a[i]
            while lo < nb and b[lo] - ta <= -max_lag:
                lo += 1
            j = lo
            while j < nb:
                d = b[j] - ta
                if d >= max_lag:
                    break
                if d >= 0:
                    counts[(d + max_lag) // bin_width] += 1
                else:
                    # operands non-negative, so C division floors
                    counts[n_bins - 1 - (max_lag - d) // bin_width] += 1
                j += 1
    return out


def greedy_coincidences(const int64_t[::1] a, const int64_t[::1] b, int64_t lo, int64_t hi):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    if na == 0 or nb == 0:
        return 0
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] matched_arr = np.zeros(nb, dtype=np.uint8)
    cdef cnp.uint8_t[::1] matched = matched_arr
    cdef Py_ssize_t i, j, p = 0, best
    cdef int64_t target2, dist, best_dist, mid2 = lo + hi
    cdef Py_ssize_t count = 0
    with nogil:
        for i in range(na):
            while p < nb and (b[p] < a[i] + lo or matched[p]):
                p += 1
            best = -1
            best_dist = 0
            target2 = 2 * a[i] + mid2
            j = p
            while j < nb and b[j] <= a[i] + hi:
                if not matched[j]:
                    dist = 2 * b[j] - target2
                    if dist < 0:
                        dist = -dist
                    if best < 0 or dist < best_dist:
                        best = j
                        best_dist = dist
                j += 1
            if best >= 0:
                matched[best] = 1
                count += 1
    return count


def dead_time_mask(const int64_t[::1] t, int64_t dead_time):
    cdef Py_ssize_t n = t.shape[0], i
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] keep_arr = np.ones(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] keep = keep_arr
    cdef int64_t last
    if n > 1 and dead_time > 0:
        with nogil:
            last = t[0]
            for i in range(1, n):
                if t[i] - last < dead_time:
                    keep[i] = 0
                else:
                    last = t[i]
    return keep_arr.view(np.bool_)
