"""Query phase: route a point through every tree, vote, then scan candidates.

A point enters the candidate set when it shares a leaf with the query in at
least ``votes`` of the trees; the approximate k-NN answer is an exact
euclidean scan of that candidate set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import as_dataset, project_query
from .exceptions import IntegrityError, ParameterError, ShapeError

__all__ = [
    "NeighborList",
    "VoteAccumulator",
    "approximate_knn",
    "candidate_set",
    "exact_knn_in_set",
    "tree_query",
]


@dataclass(frozen=True)
class NeighborList:
    """Search result: point indices ordered by ascending distance.

    Distance ties are broken by ascending point index. ``candidate_count``
    is the size of the scanned set; when it is smaller than the requested k
    the list is short, and ``shortfall`` says by how much.
    """

    indices: np.ndarray  # int64
    distances: np.ndarray  # float64
    requested_k: int
    candidate_count: int

    def __len__(self):
        return int(self.indices.shape[0])

    @property
    def shortfall(self):
        return max(0, self.requested_k - len(self))


class VoteAccumulator:
    """Dense per-point vote counters, reset lazily via an epoch stamp.

    A counter is valid only where its stamp equals the current epoch, so
    starting a new query is O(1) and the compiled kernel touches only the
    points it actually sees.
    """

    def __init__(self, n):
        self.n = n
        self._counts = np.zeros(n, dtype=np.int32)
        self._stamps = np.zeros(n, dtype=np.int64)
        self._epoch = 0

    def begin(self):
        self._epoch += 1
        return self._epoch

    def counts(self):
        """Dense n-vector of vote counts for the current epoch (copy)."""
        return np.where(self._stamps == self._epoch, self._counts, 0).astype(np.int64)

    def count(self, i):
        return int(self._counts[i]) if self._stamps[i] == self._epoch else 0

    def accumulate(self, index, leaves, votes):
        """Tally the given per-tree leaves; return points with >= ``votes`` votes."""
        epoch = self.begin()
        offsets = index.leaf_offsets
        rows = np.arange(index.n_trees)
        touched = int((offsets[rows, leaves + 1] - offsets[rows, leaves]).sum())
        out = np.empty(touched, dtype=np.int64)
        ncand = _kernels.vote(
            index.leaf_indices, offsets, leaves, votes,
            self._counts, self._stamps, epoch, out,
        )
        return out[:ncand]


def _query_vector(q, d):
    arr = np.asarray(q)
    if arr.ndim != 1:
        raise ShapeError(f"query must be 1-D, got shape {arr.shape}")
    if arr.shape[0] != d:
        raise ShapeError(f"query has length {arr.shape[0]}, expected {d}")
    if arr.dtype != np.float32 or not arr.flags.c_contiguous:
        arr = np.ascontiguousarray(arr, dtype=np.float32)
    return arr


def _route_tree(q, tree):
    p = project_query(q, tree.random_matrix)
    return int(_kernels.route(p.reshape(1, -1), tree.splits.reshape(1, -1))[0])


def tree_query(q, tree):
    """Route ``q`` into a leaf of one tree and return that leaf's point indices.

    The query is projected once onto the tree's matrix; at each level it goes
    left when its projection is <= the node's split, exactly as during
    construction.
    """
    q = _query_vector(q, tree.random_matrix.d)
    return tree.leaf(_route_tree(q, tree))


def _route_all(q, index):
    proj = np.empty((index.n_trees, index.depth), dtype=np.float32)
    for t in range(index.n_trees):
        proj[t] = project_query(q, index.matrices[t])
    return _kernels.route(proj, index.splits)


def _accumulator(index):
    acc = getattr(index._local, "acc", None)
    if acc is None or acc.n != index.n:
        acc = index._local.acc = VoteAccumulator(index.n)
    return acc


def candidate_set(q, index, votes, accumulator=None):
    """Points sharing a leaf with ``q`` in at least ``votes`` of the trees.

    Returns ``(candidates, accumulator)``; the accumulator exposes the full
    vote counts for this query.
    """
    if not 1 <= votes <= index.n_trees:
        raise ParameterError(
            f"vote threshold must lie in [1, {index.n_trees}], got {votes}"
        )
    q = _query_vector(q, index.d)
    leaves = _route_all(q, index)
    acc = accumulator if accumulator is not None else _accumulator(index)
    return acc.accumulate(index, leaves, votes), acc


def exact_knn_in_set(q, k, candidates, X):
    """Exact k nearest neighbors of ``q`` among ``candidates`` in ``X``.

    Linear scan; returns min(k, |candidates|) neighbors in ascending
    distance, ties broken by ascending point index. Duplicate candidate
    indices are collapsed.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    X = as_dataset(X)
    q = _query_vector(q, X.d)
    S = np.unique(np.asarray(candidates, dtype=np.int64).ravel())
    if S.shape[0]:
        if S[0] < 0 or S[-1] >= X.n:
            raise IntegrityError(
                f"candidate indices must lie in [0, {X.n}), got range [{S[0]}, {S[-1]}]"
            )
        d2 = _kernels.scan(X.values, S, q)
        order = np.lexsort((S, d2))[:k]
        indices, distances = S[order], np.sqrt(d2[order])
    else:
        indices = np.empty(0, dtype=np.int64)
        distances = np.empty(0, dtype=np.float64)
    return NeighborList(
        indices=indices, distances=distances,
        requested_k=k, candidate_count=int(S.shape[0]),
    )


def approximate_knn(q, k, index, votes):
    """Approximate k-NN: vote-filtered candidates, then an exact scan.

    When fewer than k points clear the vote threshold, all of them are
    returned and the deficit is visible via ``NeighborList.shortfall``.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    candidates, _ = candidate_set(q, index, votes)
    return exact_knn_in_set(q, k, candidates, index.dataset)
