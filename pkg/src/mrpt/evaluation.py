"""Ground truth, recall and the recall-vs-latency benchmark sweep."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import as_dataset, default_sparsity
from .exceptions import MRPTError, ParameterError, ShapeError
from .search import NeighborList, approximate_knn
from .trees import grow_trees

__all__ = [
    "BenchmarkRecord",
    "GroundTruth",
    "brute_force_knn",
    "compute_ground_truth",
    "pareto_frontier",
    "recall",
    "run_benchmark",
]


def brute_force_knn(q, k, X):
    """Exact k-NN by scanning the whole dataset.

    Ascending distance, ties broken by ascending point index; returns
    min(k, n) neighbors.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    X = as_dataset(X)
    qv = np.asarray(q, dtype=np.float64).ravel()
    if qv.shape[0] != X.d:
        raise ShapeError(f"query has length {qv.shape[0]}, expected {X.d}")
    diff = X.values.astype(np.float64) - qv
    d2 = (diff * diff).sum(axis=1)
    ids = np.arange(X.n, dtype=np.int64)
    order = np.lexsort((ids, d2))[:k]
    return NeighborList(
        indices=ids[order], distances=np.sqrt(d2[order]),
        requested_k=k, candidate_count=X.n,
    )


@dataclass(frozen=True)
class GroundTruth:
    """Exact k nearest neighbors of each query, from brute force only."""

    k: int
    indices: np.ndarray  # int64, (n_queries, k)
    distances: np.ndarray  # float64, (n_queries, k)
    dataset_checksum: int
    query_checksum: int

    @property
    def n_queries(self):
        return self.indices.shape[0]


def compute_ground_truth(X, queries, k):
    X = as_dataset(X)
    queries = as_dataset(queries)
    if X.d != queries.d:
        raise ShapeError(f"queries have d={queries.d} but dataset has d={X.d}")
    if not 1 <= k <= X.n:
        raise ParameterError(f"k must lie in [1, {X.n}], got {k}")
    indices = np.empty((queries.n, k), dtype=np.int64)
    distances = np.empty((queries.n, k), dtype=np.float64)
    for i in range(queries.n):
        result = brute_force_knn(queries.row(i), k, X)
        indices[i] = result.indices
        distances[i] = result.distances
    return GroundTruth(
        k=k, indices=indices, distances=distances,
        dataset_checksum=X.checksum, query_checksum=queries.checksum,
    )


def recall(result, truth):
    """Fraction of the true k nearest neighbors present in ``result``.

    ``truth`` is one ground-truth entry (an index array of exactly k, or a
    NeighborList of exactly k). Distances are ignored; only index overlap
    counts.
    """
    true_ids = truth.indices if isinstance(truth, NeighborList) else np.asarray(truth)
    true_ids = np.asarray(true_ids, dtype=np.int64).ravel()
    k = true_ids.shape[0]
    if k < 1:
        raise ParameterError("ground truth entry must contain at least one neighbor")
    if np.unique(true_ids).shape[0] != k:
        raise ParameterError("ground truth entry contains duplicate indices")
    got = result.indices if isinstance(result, NeighborList) else np.asarray(result)
    got = np.asarray(got, dtype=np.int64).ravel()
    return float(np.intersect1d(got, true_ids).shape[0] / k)


@dataclass
class BenchmarkRecord:
    """One grid point of a sweep: parameters plus measured quality and cost."""

    trees: int
    depth: int
    sparsity: float
    votes: int
    k: int
    recall: float | None = None
    qtime_s: float | None = None
    mean_candidates: float | None = None
    build_s: float | None = None
    index_bytes: int | None = None
    error: str | None = None

    @property
    def failed(self):
        return self.error is not None


def _normalize_grid_entry(entry, d):
    entry = dict(entry)
    try:
        trees = int(entry.pop("T", entry.pop("trees", None)))
        depth = int(entry.pop("depth"))
        votes = int(entry.pop("votes", entry.pop("v", None)))
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"grid entry needs T, depth and votes: {entry!r}") from exc
    sparsity = entry.pop("sparsity", entry.pop("a", None))
    if entry:
        raise ParameterError(f"unknown grid entry keys: {sorted(entry)}")
    sparsity = default_sparsity(d) if sparsity is None else float(sparsity)
    return trees, depth, sparsity, votes


def _ground_truth_cached(X, queries, k, cache_dir):
    if cache_dir is None:
        return compute_ground_truth(X, queries, k)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    name = f"gt_{X.checksum:016x}_{queries.checksum:016x}_k{k}.npz"
    path = cache_dir / name
    if path.exists():
        with np.load(path) as store:
            return GroundTruth(
                k=k,
                indices=store["indices"],
                distances=store["distances"],
                dataset_checksum=X.checksum,
                query_checksum=queries.checksum,
            )
    truth = compute_ground_truth(X, queries, k)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, indices=truth.indices, distances=truth.distances)
    tmp.replace(path)
    return truth


def run_benchmark(X, queries, k, grid, seed=0, cache_dir=None, repeats=3, fixed_count=False):
    """Sweep index/query parameters and measure recall and query time.

    For each grid entry (keys T, depth, votes, optional sparsity) the index
    is built once (entries sharing build parameters reuse it), every query is
    answered single-threaded, and the whole query pass is repeated
    ``repeats`` times with the minimum total wall time reported. Ground truth
    is computed once per (queries, k) and optionally cached on disk under
    ``cache_dir``. Failing entries are recorded with their error instead of
    aborting the sweep.
    """
    X = as_dataset(X)
    queries = as_dataset(queries)
    if not grid:
        raise ParameterError("grid must contain at least one entry")
    if repeats < 1:
        raise ParameterError(f"repeats must be >= 1, got {repeats}")
    truth = _ground_truth_cached(X, queries, k, cache_dir)
    built = {}
    records = []
    for entry in grid:
        trees, depth, sparsity, votes = _normalize_grid_entry(entry, X.d)
        record = BenchmarkRecord(trees=trees, depth=depth, sparsity=sparsity, votes=votes, k=k)
        try:
            key = (trees, depth, sparsity)
            if key not in built:
                t0 = time.perf_counter()
                index = grow_trees(
                    X, trees, depth, sparsity, seed=seed, fixed_count=fixed_count
                )
                built[key] = (index, time.perf_counter() - t0)
            index, build_s = built[key]

            recalls = np.empty(queries.n)
            candidates = np.empty(queries.n)
            best = math.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                for i in range(queries.n):
                    result = approximate_knn(queries.row(i), k, index, votes)
                    recalls[i] = recall(result, truth.indices[i])
                    candidates[i] = result.candidate_count
                best = min(best, time.perf_counter() - t0)

            record.recall = float(recalls.mean())
            record.qtime_s = best
            record.mean_candidates = float(candidates.mean())
            record.build_s = build_s
            record.index_bytes = index.memory_bytes()
        except MRPTError as exc:
            record.error = str(exc)
        records.append(record)
    return records


def pareto_frontier(records):
    """Records not dominated in (higher recall, lower query time), recall-ascending.

    Failed records are ignored.
    """
    valid = [r for r in records if not r.failed and r.recall is not None]

    def dominates(a, b):
        return (
            a.recall >= b.recall
            and a.qtime_s <= b.qtime_s
            and (a.recall > b.recall or a.qtime_s < b.qtime_s)
        )

    frontier = [r for r in valid if not any(dominates(other, r) for other in valid)]
    return sorted(frontier, key=lambda r: (r.recall, r.qtime_s))
