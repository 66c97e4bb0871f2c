"""Vector file I/O: fvecs, bvecs and csv.

Binary formats follow the texmex corpus convention: each record is a 4-byte
little-endian int dimension header followed by the components, float32 for
fvecs and unsigned bytes (widened to float on load) for bvecs. All records in
a file must share the same dimension. Writes go to a temp file in the target
directory and are renamed into place.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .core import Dataset, as_dataset
from .exceptions import FormatError, ParameterError

__all__ = ["atomic_write_bytes", "load_vectors", "save_vectors"]

FORMATS = ("fvecs", "bvecs", "csv")


def _infer_format(path):
    suffix = Path(path).suffix.lstrip(".").lower()
    if suffix in FORMATS:
        return suffix
    raise ParameterError(
        f"cannot infer vector format from {path!r}; pass one of {FORMATS}"
    )


def atomic_write_bytes(path, payload):
    """Write bytes to ``path`` via a temp file + rename in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_fvecs(raw):
    if len(raw) < 4:
        raise FormatError("fvecs file is empty or truncated")
    d = int(np.frombuffer(raw[:4], dtype="<i4")[0])
    if d < 1:
        raise FormatError(f"fvecs record declares non-positive dimension {d}")
    record = 4 * (d + 1)
    if len(raw) % record:
        raise FormatError(
            f"fvecs file size {len(raw)} is not a multiple of the {record}-byte record"
        )
    dims = np.frombuffer(raw, dtype="<i4").reshape(-1, d + 1)[:, 0]
    if not (dims == d).all():
        raise FormatError("fvecs records disagree on dimension")
    values = np.frombuffer(raw, dtype="<f4").reshape(-1, d + 1)[:, 1:]
    return np.ascontiguousarray(values, dtype=np.float32)


def _read_bvecs(raw):
    if len(raw) < 4:
        raise FormatError("bvecs file is empty or truncated")
    d = int(np.frombuffer(raw[:4], dtype="<i4")[0])
    if d < 1:
        raise FormatError(f"bvecs record declares non-positive dimension {d}")
    record = 4 + d
    if len(raw) % record:
        raise FormatError(
            f"bvecs file size {len(raw)} is not a multiple of the {record}-byte record"
        )
    mat = np.frombuffer(raw, dtype="<u1").reshape(-1, record)
    dims = np.ascontiguousarray(mat[:, :4]).view("<i4").ravel()
    if not (dims == d).all():
        raise FormatError("bvecs records disagree on dimension")
    return mat[:, 4:].astype(np.float32)


def _read_csv(path):
    try:
        values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"malformed csv vector file {path!r}: {exc}") from exc
    if values.size == 0:
        raise FormatError(f"csv vector file {path!r} is empty")
    return values.astype(np.float32)


def load_vectors(path, fmt=None):
    """Load a vector file into a Dataset. Format inferred from the suffix."""
    path = os.fspath(path)
    fmt = fmt or _infer_format(path)
    if fmt not in FORMATS:
        raise ParameterError(f"unknown vector format {fmt!r}; expected one of {FORMATS}")
    if fmt == "csv":
        values = _read_csv(path)
    else:
        with open(path, "rb") as fh:
            raw = fh.read()
        values = _read_fvecs(raw) if fmt == "fvecs" else _read_bvecs(raw)
    try:
        return Dataset(values)
    except ParameterError as exc:
        raise FormatError(f"invalid vector file {path!r}: {exc}") from exc


def save_vectors(X, path, fmt=None):
    """Write a dataset to fvecs/bvecs/csv. bvecs requires values in [0, 255]."""
    X = as_dataset(X)
    path = os.fspath(path)
    fmt = fmt or _infer_format(path)
    if fmt == "fvecs":
        dims = np.full((X.n, 1), X.d, dtype="<i4")
        rows = np.hstack([dims.view("<u1"), X.values.astype("<f4").view("<u1")])
        atomic_write_bytes(path, rows.tobytes())
    elif fmt == "bvecs":
        vals = X.values
        if ((vals < 0) | (vals > 255) | (vals != np.round(vals))).any():
            raise ParameterError("bvecs requires integral values in [0, 255]")
        dims = np.full((X.n, 1), X.d, dtype="<i4")
        rows = np.hstack([dims.view("<u1"), vals.astype("<u1")])
        atomic_write_bytes(path, rows.tobytes())
    elif fmt == "csv":
        lines = "\n".join(
            ",".join(f"{v:.9g}" for v in row) for row in X.values
        )
        atomic_write_bytes(path, (lines + "\n").encode("ascii"))
    else:
        raise ParameterError(f"unknown vector format {fmt!r}; expected one of {FORMATS}")
