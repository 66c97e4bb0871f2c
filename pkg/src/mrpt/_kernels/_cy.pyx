# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled hot kernels: projection, tree routing, vote tallying, exact scan.

Must stay semantically interchangeable with ``_py``; the projection kernel
must also stay bit-identical to it (float64 accumulation in stored column
order, one final rounding to float32). The extension is built with
``-ffp-contract=off`` so the compiler cannot fuse the multiply-add and change
the rounding.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def project(const float[:, ::1] data, const cnp.int64_t[::1] col_ptr,
            const cnp.int32_t[::1] rows, const float[::1] vals):
    cdef Py_ssize_t m = data.shape[0]
    cdef Py_ssize_t ncols = col_ptr.shape[0] - 1
    out = np.empty((m, ncols), dtype=np.float32)
    cdef float[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef cnp.int64_t t
    cdef double acc
    with nogil:
        for i in range(m):
            for j in range(ncols):
                acc = 0.0
                for t in range(col_ptr[j], col_ptr[j + 1]):
                    acc = acc + (<double> data[i, rows[t]]) * (<double> vals[t])
                o[i, j] = <float> acc
    return out


def route(const float[:, ::1] proj, const float[:, ::1] splits):
    cdef Py_ssize_t n_trees = proj.shape[0]
    cdef Py_ssize_t depth = proj.shape[1]
    cdef cnp.int64_t n_internal = splits.shape[1]
    out = np.empty(n_trees, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef Py_ssize_t t, level
    cdef cnp.int64_t node
    with nogil:
        for t in range(n_trees):
            node = 0
            for level in range(depth):
                if proj[t, level] <= splits[t, node]:
                    node = 2 * node + 1
                else:
                    node = 2 * node + 2
            o[t] = node - n_internal
    return out


def vote(const cnp.int32_t[:, ::1] leaf_indices, const cnp.int64_t[:, ::1] leaf_offsets,
         const cnp.int64_t[::1] leaves, cnp.int64_t v,
         cnp.int32_t[::1] counts, cnp.int64_t[::1] stamps, cnp.int64_t epoch,
         cnp.int64_t[::1] out):
    cdef Py_ssize_t n_trees = leaves.shape[0]
    cdef Py_ssize_t t
    cdef cnp.int64_t p, start, stop, ncand = 0
    cdef cnp.int32_t idx
    with nogil:
        for t in range(n_trees):
            start = leaf_offsets[t, leaves[t]]
            stop = leaf_offsets[t, leaves[t] + 1]
            for p in range(start, stop):
                idx = leaf_indices[t, p]
                if stamps[idx] != epoch:
                    stamps[idx] = epoch
                    counts[idx] = 0
                counts[idx] += 1
                if counts[idx] == v:
                    out[ncand] = idx
                    ncand += 1
    return ncand


def scan(const float[:, ::1] data, const cnp.int64_t[::1] cand, const float[::1] q):
    cdef Py_ssize_t m = cand.shape[0]
    cdef Py_ssize_t d = data.shape[1]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, c
    cdef cnp.int64_t row
    cdef double acc, diff
    with nogil:
        for i in range(m):
            row = cand[i]
            acc = 0.0
            for c in range(d):
                diff = (<double> data[row, c]) - (<double> q[c])
                acc = acc + diff * diff
            o[i] = acc
    return out


def fnv1a64(const unsigned char[::1] buf):
    cdef cnp.uint64_t h = 0xCBF29CE484222325
    cdef Py_ssize_t i
    with nogil:
        for i in range(buf.shape[0]):
            h = (h ^ <cnp.uint64_t> buf[i]) * <cnp.uint64_t> 0x100000001B3
    return int(h)
