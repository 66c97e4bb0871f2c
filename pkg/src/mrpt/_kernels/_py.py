"""Pure-numpy kernel implementations.

These are the fallback for the compiled extension in ``_cy``. The projection
kernel is written so that its floating-point result is bit-identical to the
compiled one: every output element accumulates the stored column entries in
the same order, in float64, with one final rounding to float32. That property
is what makes routing a data point through its own tree land in its own leaf,
and what keeps indexes byte-identical regardless of which backend built them.
"""

from __future__ import annotations

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def project(data, col_ptr, rows, vals):
    """Multiply ``data`` (m, d) by a CSC matrix given as (col_ptr, rows, vals).

    Returns an (m, n_cols) float32 array. Accumulation is float64, entry by
    entry in stored column order.
    """
    m = data.shape[0]
    ncols = len(col_ptr) - 1
    out = np.empty((m, ncols), dtype=np.float32)
    if m == 1:
        # Scalar path: Python floats are IEEE binary64, so the operation
        # sequence matches the vector path below bit for bit.
        row = data[0]
        for j in range(ncols):
            acc = 0.0
            for t in range(col_ptr[j], col_ptr[j + 1]):
                acc += float(row[rows[t]]) * float(vals[t])
            out[0, j] = acc
        return out
    acc = np.empty(m, dtype=np.float64)
    for j in range(ncols):
        acc[:] = 0.0
        for t in range(col_ptr[j], col_ptr[j + 1]):
            acc += data[:, rows[t]].astype(np.float64) * float(vals[t])
        out[:, j] = acc
    return out


def route(proj, splits):
    """Descend ``proj`` (T, depth) through per-tree split arrays (T, 2^depth - 1).

    Returns the leaf id reached in each tree. A projection value <= the node's
    split goes left.
    """
    n_trees, depth = proj.shape
    node = np.zeros(n_trees, dtype=np.int64)
    tree_ids = np.arange(n_trees)
    for level in range(depth):
        s = splits[tree_ids, node]
        node = 2 * node + 1 + (proj[:, level] > s)
    return node - splits.shape[1]


def vote(leaf_indices, leaf_offsets, leaves, v, counts, stamps, epoch, out):
    """Tally leaf co-occurrences and collect points with at least ``v`` votes.

    Same signature as the compiled kernel: ``counts``/``stamps`` form an
    epoch-stamped accumulator (a count is valid where ``stamps == epoch``).
    This fallback recounts with ``bincount`` and stamps the whole array, which
    is O(n) per query instead of O(touched). Returns the candidate count;
    candidates are written to ``out``.
    """
    n = counts.shape[0]
    parts = [
        leaf_indices[t, leaf_offsets[t, leaf]:leaf_offsets[t, leaf + 1]]
        for t, leaf in enumerate(leaves)
    ]
    touched = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    tallies = np.bincount(touched, minlength=n).astype(np.int32)
    counts[:] = tallies
    stamps[:] = epoch
    cands = np.flatnonzero(tallies >= v)
    out[: len(cands)] = cands
    return len(cands)


def scan(data, cand, q):
    """Squared euclidean distances (float64) from ``q`` to ``data[cand]``."""
    diff = data[cand].astype(np.float64) - q.astype(np.float64)
    return (diff * diff).sum(axis=1)


def fnv1a64(buf):
    """64-bit FNV-1a hash of a uint8 array."""
    h = FNV_OFFSET
    for b in np.asarray(buf, dtype=np.uint8).tobytes():
        h = ((h ^ b) * FNV_PRIME) & _U64
    return h
