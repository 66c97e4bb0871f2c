"""Numeric foundations: sparse random projections and euclidean distance.

Conventions used throughout the package:

* point coordinates and projection values are float32, accumulated in
  float64 inside every dot product;
* projection matrices are stored in compressed-column form, one column per
  tree level;
* projecting a single vector and projecting it as a row of a batch give
  bit-identical results (see ``mrpt._kernels``), so split comparisons made
  at query time reproduce the ones made at build time exactly.
"""

from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .exceptions import ParameterError, ShapeError

__all__ = [
    "Dataset",
    "SparseProjectionMatrix",
    "as_dataset",
    "count_macs",
    "default_sparsity",
    "euclidean_distance",
    "project_dataset",
    "project_query",
    "sample_sparse_matrix",
]


def default_sparsity(d):
    """Default density of projection vectors: 1/sqrt(d)."""
    return 1.0 / math.sqrt(d)


class Dataset:
    """Immutable row-major collection of n points in d dimensions (float32).

    Point indices 0..n-1 are positional and stay valid for the life of any
    index built over the dataset.
    """

    __slots__ = ("values", "_checksum")

    def __init__(self, values):
        arr = np.asarray(values)
        if arr.ndim != 2:
            raise ShapeError(f"dataset must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ParameterError("dataset needs at least one point and one dimension")
        if arr.dtype == np.float32 and arr.flags.c_contiguous:
            arr = arr.view()
        else:
            arr = np.ascontiguousarray(arr, dtype=np.float32)
        if not np.isfinite(arr).all():
            raise ParameterError("dataset coordinates must be finite")
        arr.flags.writeable = False
        self.values = arr
        self._checksum = None

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    @property
    def checksum(self):
        """64-bit FNV-1a hash over the raw float32 bytes."""
        if self._checksum is None:
            self._checksum = _kernels.fnv1a64(self.values.view(np.uint8).reshape(-1))
        return self._checksum

    def row(self, i):
        return self.values[i]

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Dataset(n={self.n}, d={self.d})"


def as_dataset(x):
    return x if isinstance(x, Dataset) else Dataset(x)


@dataclass(frozen=True)
class SparseProjectionMatrix:
    """d x depth random matrix in compressed-column storage.

    Entries are standard-normal with probability ``a`` and exactly zero
    otherwise; only the realized non-zeros are stored. With
    ``fixed_count=True`` every column holds exactly ceil(a*d) non-zeros
    instead (useful for exact operation-count accounting).
    """

    d: int
    depth: int
    a: float
    seed: object
    col_ptr: np.ndarray  # int64, (depth + 1,)
    row_idx: np.ndarray  # int32, (nnz,)
    values: np.ndarray  # float32, (nnz,)
    fixed_count: bool = False

    @property
    def nnz(self):
        return int(self.values.shape[0])

    @property
    def density(self):
        return self.nnz / (self.d * self.depth)

    def nonzeros_per_column(self):
        return np.diff(self.col_ptr)

    def toarray(self):
        """Dense d x depth copy (small matrices / tests only)."""
        dense = np.zeros((self.d, self.depth), dtype=np.float32)
        for j in range(self.depth):
            lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
            dense[self.row_idx[lo:hi], j] = self.values[lo:hi]
        return dense


def _normalize_seed(seed):
    entropy = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    for part in entropy:
        if not isinstance(part, (int, np.integer)) or part < 0:
            raise ParameterError(f"seed must be a non-negative integer, got {seed!r}")
    return tuple(int(part) for part in entropy)


def sample_sparse_matrix(d, depth, a, seed, fixed_count=False):
    """Draw a d x depth sparse random projection matrix.

    Entries are gated by independent Bernoulli(a) draws and filled with
    standard-normal deviates; identical (d, depth, a, seed) arguments
    reproduce the matrix bit for bit. The generator is Philox (counter-based)
    keyed from the seed, consumed in a fixed order: the Bernoulli gate for
    all entries first, then the normal deviates column by column.
    """
    if d < 1 or depth < 1:
        raise ParameterError(f"matrix dimensions must be positive, got d={d}, depth={depth}")
    if not 0.0 < a <= 1.0:
        raise ParameterError(f"sparsity must lie in (0, 1], got {a}")
    entropy = _normalize_seed(seed)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
    per_column_rows = []
    if fixed_count:
        m = math.ceil(a * d)
        for _ in range(depth):
            per_column_rows.append(np.sort(rng.choice(d, size=m, replace=False)))
    else:
        mask = rng.random((d, depth)) < a
        for j in range(depth):
            per_column_rows.append(np.flatnonzero(mask[:, j]))
    counts = np.array([len(r) for r in per_column_rows], dtype=np.int64)
    col_ptr = np.zeros(depth + 1, dtype=np.int64)
    np.cumsum(counts, out=col_ptr[1:])
    row_idx = (
        np.concatenate(per_column_rows).astype(np.int32)
        if col_ptr[-1]
        else np.empty(0, dtype=np.int32)
    )
    values = np.empty(int(col_ptr[-1]), dtype=np.float32)
    for j in range(depth):
        values[col_ptr[j]:col_ptr[j + 1]] = rng.standard_normal(int(counts[j]))
    for arr in (col_ptr, row_idx, values):
        arr.flags.writeable = False
    return SparseProjectionMatrix(
        d=d, depth=depth, a=a, seed=entropy if len(entropy) > 1 else entropy[0],
        col_ptr=col_ptr, row_idx=row_idx, values=values, fixed_count=fixed_count,
    )


# --- multiply-accumulate instrumentation ---------------------------------

_counter_state = threading.local()


@dataclass
class MacCounter:
    """Tally of scalar multiply-accumulate operations done by projections."""

    macs: int = 0


@contextmanager
def count_macs():
    """Context manager counting projection multiply-accumulates in this thread."""
    stack = getattr(_counter_state, "stack", None)
    if stack is None:
        stack = _counter_state.stack = []
    counter = MacCounter()
    stack.append(counter)
    try:
        yield counter
    finally:
        stack.remove(counter)


def _record_macs(amount):
    stack = getattr(_counter_state, "stack", None)
    if stack:
        for counter in stack:
            counter.macs += amount


# --- projection and distance ----------------------------------------------


def _as_matrix(X):
    if isinstance(X, Dataset):
        return X.values
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D array of points, got shape {arr.shape}")
    if arr.dtype != np.float32 or not arr.flags.c_contiguous:
        arr = np.ascontiguousarray(arr, dtype=np.float32)
    return arr


def project_dataset(X, R):
    """Project all points of ``X`` onto matrix ``R`` in one batched pass.

    Returns the n x depth float32 projection matrix.
    """
    data = _as_matrix(X)
    if data.shape[1] != R.d:
        raise ShapeError(f"dataset has d={data.shape[1]} but matrix expects d={R.d}")
    _record_macs(data.shape[0] * R.nnz)
    return _kernels.project(data, R.col_ptr, R.row_idx, R.values)


def project_query(q, R):
    """Project a single d-vector onto ``R``; returns a float32 depth-vector.

    Bit-identical to the corresponding row of ``project_dataset``.
    """
    arr = np.asarray(q)
    if arr.ndim != 1:
        raise ShapeError(f"query must be 1-D, got shape {arr.shape}")
    if arr.shape[0] != R.d:
        raise ShapeError(f"query has length {arr.shape[0]} but matrix expects d={R.d}")
    if arr.dtype != np.float32 or not arr.flags.c_contiguous:
        arr = np.ascontiguousarray(arr, dtype=np.float32)
    _record_macs(R.nnz)
    return _kernels.project(arr.reshape(1, -1), R.col_ptr, R.row_idx, R.values)[0]


def euclidean_distance(x, y):
    """Euclidean distance between two equal-length vectors (float64 accumulation)."""
    xv = np.asarray(x, dtype=np.float64).ravel()
    yv = np.asarray(y, dtype=np.float64).ravel()
    if xv.shape != yv.shape:
        raise ShapeError(f"length mismatch: {xv.shape[0]} vs {yv.shape[0]}")
    diff = xv - yv
    return float(np.sqrt(np.dot(diff, diff)))
