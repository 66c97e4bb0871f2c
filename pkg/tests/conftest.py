"""Shared test helpers."""

import numpy as np
import pytest

from mrpt.core import SparseProjectionMatrix


def matrix_from_dense(arr, a=1.0, seed=0):
    """Build a SparseProjectionMatrix holding exactly the non-zeros of ``arr``."""
    arr = np.asarray(arr, dtype=np.float32)
    d, depth = arr.shape
    cols = [np.flatnonzero(arr[:, j]) for j in range(depth)]
    col_ptr = np.zeros(depth + 1, dtype=np.int64)
    col_ptr[1:] = np.cumsum([len(c) for c in cols])
    if col_ptr[-1]:
        row_idx = np.concatenate(cols).astype(np.int32)
        values = np.concatenate([arr[c, j] for j, c in enumerate(cols)]).astype(np.float32)
    else:
        row_idx = np.empty(0, dtype=np.int32)
        values = np.empty(0, dtype=np.float32)
    return SparseProjectionMatrix(
        d=d, depth=depth, a=a, seed=seed,
        col_ptr=col_ptr, row_idx=row_idx, values=values,
    )


def gaussian(rng, n, d):
    return rng.standard_normal((n, d)).astype(np.float32)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
