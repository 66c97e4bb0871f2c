"""Binary index files.

The file stores build parameters, each tree's sparse projection matrix,
split values and leaf layout, plus a checksum of the dataset it was built
over. It does not store the data vectors themselves; the dataset is
re-supplied at load time and verified against the checksum. All fields are
little-endian, so files round-trip across platforms.
"""

from __future__ import annotations

import io as _io
import os
import struct

import numpy as np

from .core import SparseProjectionMatrix, as_dataset
from .exceptions import ChecksumMismatchError, FormatError
from .io import atomic_write_bytes
from .trees import MRPTIndex

__all__ = ["load_index", "save_index"]

MAGIC = b"MRPTIDX\x00"
VERSION = 1
_FLAG_FIXED_COUNT = 1

# magic, version, flags, n, d, T, depth, sparsity, seed, dataset checksum
_HEADER = struct.Struct("<8sII QIII d QQ")


def save_index(index, path):
    """Serialize an index; same-seed builds produce byte-identical files."""
    head = _HEADER.pack(
        MAGIC,
        VERSION,
        _FLAG_FIXED_COUNT if index.fixed_count else 0,
        index.n,
        index.d,
        index.n_trees,
        index.depth,
        index.sparsity,
        index.seed,
        index.dataset_checksum,
    )
    buf = _io.BytesIO()
    buf.write(head)
    for t in range(index.n_trees):
        R = index.matrices[t]
        buf.write(struct.pack("<Q", R.nnz))
        buf.write(R.col_ptr.astype("<i8").tobytes())
        buf.write(R.row_idx.astype("<i4").tobytes())
        buf.write(R.values.astype("<f4").tobytes())
        buf.write(index.splits[t].astype("<f4").tobytes())
        buf.write(index.leaf_offsets[t].astype("<i8").tobytes())
        buf.write(index.leaf_indices[t].astype("<i4").tobytes())
    atomic_write_bytes(path, buf.getvalue())


class _Reader:
    def __init__(self, raw):
        self.raw = raw
        self.pos = 0

    def take(self, count):
        if self.pos + count > len(self.raw):
            raise FormatError("index file is truncated")
        chunk = self.raw[self.pos:self.pos + count]
        self.pos += count
        return chunk

    def array(self, dtype, count):
        dtype = np.dtype(dtype)
        arr = np.frombuffer(self.take(dtype.itemsize * count), dtype=dtype)
        return arr.astype(dtype.newbyteorder("="), copy=True)

    def done(self):
        return self.pos == len(self.raw)


def load_index(path, X):
    """Load an index and bind it to its dataset.

    Rejects files whose stored checksum does not match ``X``; a truncated or
    foreign file raises FormatError without returning a partial index.
    """
    X = as_dataset(X)
    with open(os.fspath(path), "rb") as fh:
        raw = fh.read()
    reader = _Reader(raw)
    try:
        magic, version, flags, n, d, n_trees, depth, sparsity, seed, checksum = _HEADER.unpack(
            reader.take(_HEADER.size)
        )
    except struct.error as exc:
        raise FormatError(f"not an index file: {exc}") from exc
    if magic != MAGIC:
        raise FormatError("not an index file (bad magic)")
    if version != VERSION:
        raise FormatError(f"unsupported index format version {version} (expected {VERSION})")
    if checksum != X.checksum:
        raise ChecksumMismatchError(
            "index was built over a different dataset "
            f"(stored checksum {checksum:016x}, supplied {X.checksum:016x})"
        )
    if (n, d) != (X.n, X.d):
        raise ChecksumMismatchError(
            f"index was built over {n} x {d} data but the supplied dataset is {X.n} x {X.d}"
        )
    if n_trees < 1 or not 1 <= depth <= 62 or 2 ** depth > n:
        raise FormatError(f"implausible index geometry: T={n_trees}, depth={depth}, n={n}")
    fixed_count = bool(flags & _FLAG_FIXED_COUNT)
    n_internal = 2 ** depth - 1
    matrices = []
    splits = np.empty((n_trees, n_internal), dtype=np.float32)
    leaf_offsets = np.empty((n_trees, 2 ** depth + 1), dtype=np.int64)
    leaf_indices = np.empty((n_trees, n), dtype=np.int32)
    for t in range(n_trees):
        (nnz,) = struct.unpack("<Q", reader.take(8))
        col_ptr = reader.array("<i8", depth + 1)
        row_idx = reader.array("<i4", nnz)
        values = reader.array("<f4", nnz)
        if col_ptr[0] != 0 or col_ptr[-1] != nnz or (np.diff(col_ptr) < 0).any():
            raise FormatError("corrupt sparse matrix column offsets")
        if nnz and (row_idx.min() < 0 or row_idx.max() >= d):
            raise FormatError("sparse matrix row index out of range")
        for arr in (col_ptr, row_idx, values):
            arr.flags.writeable = False
        matrices.append(
            SparseProjectionMatrix(
                d=d, depth=depth, a=sparsity, seed=(seed, t),
                col_ptr=col_ptr, row_idx=row_idx, values=values,
                fixed_count=fixed_count,
            )
        )
        splits[t] = reader.array("<f4", n_internal)
        offsets = reader.array("<i8", 2 ** depth + 1)
        if offsets[0] != 0 or offsets[-1] != n or (np.diff(offsets) < 0).any():
            raise FormatError("corrupt leaf offsets")
        leaf_offsets[t] = offsets
        points = reader.array("<i4", n)
        if n and (points.min() < 0 or points.max() >= n):
            raise FormatError("leaf point index out of range")
        leaf_indices[t] = points
    if not reader.done():
        raise FormatError("trailing bytes after index payload")
    return MRPTIndex(
        dataset=X,
        n_trees=n_trees,
        depth=depth,
        sparsity=sparsity,
        seed=seed,
        fixed_count=fixed_count,
        matrices=matrices,
        splits=splits,
        leaf_offsets=leaf_offsets,
        leaf_indices=leaf_indices,
        dataset_checksum=checksum,
    )
