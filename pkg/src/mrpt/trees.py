"""Random projection tree construction.

Each tree is a complete binary tree of a fixed depth. One projection vector
is shared by all nodes on a level, so the whole tree's projections are a
single batched multiply. Trees are stored flat: a heap-ordered array of
split values (node 0 is the root, children of node i are 2i+1 and 2i+2) and
one contiguous array of point indices partitioned into 2^depth leaf slices.
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Dataset,
    SparseProjectionMatrix,
    as_dataset,
    default_sparsity,
    project_dataset,
    sample_sparse_matrix,
)
from .exceptions import DepthError, ParameterError

__all__ = ["MRPTIndex", "RPTree", "build_tree", "grow_trees", "median_split"]


def median_split(values, indices):
    """Split ``indices`` by the lower median of their paired projection values.

    The split value is the ceil(m/2)-th smallest projection (a value from the
    array, found by linear-time selection). Entries with value <= split go
    left, the rest go right; membership depends on values only, never on
    index order. With all-distinct values this yields a ceil(m/2)/floor(m/2)
    split; with ties the left side can be larger, and the right side may even
    be empty.
    """
    values = np.asarray(values)
    indices = np.asarray(indices)
    m = values.shape[0]
    if m < 2:
        raise ParameterError(f"median_split needs at least 2 entries, got {m}")
    kth = (m + 1) // 2 - 1
    split = np.partition(values, kth)[kth]
    mask = values <= split
    return split, indices[mask], indices[~mask]


def build_tree(P, depth, indices=None):
    """Grow one tree from precomputed projections ``P`` (n points x depth levels).

    Splits level by level: points whose projection on column ``level`` is
    <= the node's median go to the left child. Degenerate nodes are allowed
    so duplicate data cannot break construction: a single-point node splits
    into (itself, empty) and an empty node produces empty children (its
    stored split value is 0.0 and is never meaningful).

    Returns ``(splits, leaf_offsets, leaf_indices)``: heap-ordered float32
    split values (2^depth - 1), int64 leaf boundaries (2^depth + 1) and the
    partitioned int32 point indices.
    """
    P = np.asarray(P)
    if depth < 0 or P.shape[1] < depth:
        raise ParameterError(f"projection matrix has {P.shape[1]} levels, need {depth}")
    if indices is None:
        order = np.arange(P.shape[0], dtype=np.int32)
    else:
        order = np.array(indices, dtype=np.int32)
    splits = np.zeros(2 ** depth - 1, dtype=np.float32)
    bounds = np.array([0, len(order)], dtype=np.int64)
    pos = 0
    for level in range(depth):
        next_bounds = np.empty(2 * len(bounds) - 1, dtype=np.int64)
        next_bounds[0] = 0
        for node in range(len(bounds) - 1):
            start, stop = bounds[node], bounds[node + 1]
            segment = order[start:stop]
            m = stop - start
            if m == 0:
                n_left = 0
            elif m == 1:
                splits[pos] = P[segment[0], level]
                n_left = 1
            else:
                split, left, right = median_split(P[segment, level], segment)
                order[start:stop] = np.concatenate([left, right])
                splits[pos] = split
                n_left = len(left)
            next_bounds[2 * node + 1] = start + n_left
            next_bounds[2 * node + 2] = stop
            pos += 1
        bounds = next_bounds
    return splits, bounds, order


@dataclass(frozen=True)
class RPTree:
    """One tree of an index: its projection matrix plus the flat tree arrays."""

    random_matrix: SparseProjectionMatrix
    depth: int
    splits: np.ndarray  # float32, (2^depth - 1,)
    leaf_offsets: np.ndarray  # int64, (2^depth + 1,)
    leaf_indices: np.ndarray  # int32, (n,)

    @property
    def n_leaves(self):
        return 2 ** self.depth

    def leaf(self, leaf_id):
        """Point indices stored in the given leaf (copy)."""
        start, stop = self.leaf_offsets[leaf_id], self.leaf_offsets[leaf_id + 1]
        return self.leaf_indices[start:stop].copy()

    def leaf_sizes(self):
        return np.diff(self.leaf_offsets)


@dataclass
class MRPTIndex:
    """T random projection trees over one dataset, plus build parameters."""

    dataset: Dataset
    n_trees: int
    depth: int
    sparsity: float
    seed: int
    fixed_count: bool
    matrices: list
    splits: np.ndarray  # float32, (T, 2^depth - 1)
    leaf_offsets: np.ndarray  # int64, (T, 2^depth + 1)
    leaf_indices: np.ndarray  # int32, (T, n)
    dataset_checksum: int
    _local: threading.local = field(default_factory=threading.local, repr=False)

    def tree(self, t):
        return RPTree(
            random_matrix=self.matrices[t],
            depth=self.depth,
            splits=self.splits[t],
            leaf_offsets=self.leaf_offsets[t],
            leaf_indices=self.leaf_indices[t],
        )

    def __iter__(self):
        return (self.tree(t) for t in range(self.n_trees))

    @property
    def n(self):
        return self.dataset.n

    @property
    def d(self):
        return self.dataset.d

    def max_candidates(self):
        """Upper bound on any candidate set: T * ceil(n / 2^depth)."""
        return self.n_trees * math.ceil(self.n / 2 ** self.depth)

    def memory_bytes(self):
        """Index memory: sparse matrices, splits and leaf arrays (data excluded)."""
        total = self.splits.nbytes + self.leaf_offsets.nbytes + self.leaf_indices.nbytes
        for R in self.matrices:
            total += R.col_ptr.nbytes + R.row_idx.nbytes + R.values.nbytes
        return total

    def query(self, q, k, votes):
        from .search import approximate_knn

        return approximate_knn(q, k, self, votes)


def _resolve_threads(threads):
    if threads is None:
        env = os.environ.get("MRPT_THREADS", "").strip()
        threads = int(env) if env else 1
    if threads < 1:
        raise ParameterError(f"thread count must be >= 1, got {threads}")
    return threads


def grow_trees(X, n_trees, depth, sparsity=None, seed=0, fixed_count=False, threads=None):
    """Build an index of ``n_trees`` trees of the given depth over ``X``.

    Tree t draws its projection matrix from a stream keyed by (seed, t), so
    builds are reproducible regardless of how construction is scheduled.
    ``sparsity`` defaults to 1/sqrt(d). Depth must satisfy 2^depth <= n so
    that no leaf is structurally empty. Set ``threads`` (or MRPT_THREADS) to
    build trees in parallel.
    """
    X = as_dataset(X)
    if n_trees < 1:
        raise ParameterError(f"tree count must be >= 1, got {n_trees}")
    if depth < 1:
        raise DepthError(f"depth must be >= 1, got {depth}")
    if 2 ** depth > X.n:
        raise DepthError(
            f"depth {depth} gives {2 ** depth} leaves but the dataset has only {X.n} points"
        )
    if sparsity is None:
        sparsity = default_sparsity(X.d)
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
    threads = _resolve_threads(threads)

    matrices = [None] * n_trees
    splits = np.empty((n_trees, 2 ** depth - 1), dtype=np.float32)
    leaf_offsets = np.empty((n_trees, 2 ** depth + 1), dtype=np.int64)
    leaf_indices = np.empty((n_trees, X.n), dtype=np.int32)

    def build_one(t):
        R = sample_sparse_matrix(X.d, depth, sparsity, seed=(seed, t), fixed_count=fixed_count)
        P = project_dataset(X, R)
        tree_splits, offsets, order = build_tree(P, depth)
        matrices[t] = R
        splits[t] = tree_splits
        leaf_offsets[t] = offsets
        leaf_indices[t] = order

    if threads == 1 or n_trees == 1:
        for t in range(n_trees):
            build_one(t)
    else:
        with ThreadPoolExecutor(max_workers=min(threads, n_trees)) as pool:
            list(pool.map(build_one, range(n_trees)))

    return MRPTIndex(
        dataset=X,
        n_trees=n_trees,
        depth=depth,
        sparsity=float(sparsity),
        seed=seed,
        fixed_count=fixed_count,
        matrices=matrices,
        splits=splits,
        leaf_offsets=leaf_offsets,
        leaf_indices=leaf_indices,
        dataset_checksum=X.checksum,
    )
