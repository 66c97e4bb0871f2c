"""Compiled and pure-python kernels must be interchangeable.

The projection kernels are required to be bit-identical; routing and voting
are integer-exact given identical projections; scan distances may differ in
the final ulp (different summation trees), which never reorders results on
continuous data.
"""

import numpy as np
import pytest

import mrpt
from mrpt import _kernels
from mrpt._kernels import _py

from conftest import gaussian

_cy = pytest.importorskip("mrpt._kernels._cy", reason="compiled kernels not built")


@pytest.fixture
def matrix(rng):
    return mrpt.sample_sparse_matrix(48, 6, a=0.25, seed=7)


def test_projection_bit_identical_batched(rng, matrix):
    X = gaussian(rng, 500, 48)
    a = _cy.project(X, matrix.col_ptr, matrix.row_idx, matrix.values)
    b = _py.project(X, matrix.col_ptr, matrix.row_idx, matrix.values)
    assert a.tobytes() == b.tobytes()


def test_projection_bit_identical_single_row(rng, matrix):
    q = gaussian(rng, 1, 48)
    a = _cy.project(q, matrix.col_ptr, matrix.row_idx, matrix.values)
    b = _py.project(q, matrix.col_ptr, matrix.row_idx, matrix.values)
    assert a.tobytes() == b.tobytes()


def test_single_row_equals_batch_row_exactly(rng, matrix):
    X = gaussian(rng, 64, 48)
    batch = _cy.project(X, matrix.col_ptr, matrix.row_idx, matrix.values)
    for i in (0, 13, 63):
        row = _cy.project(
            np.ascontiguousarray(X[i:i + 1]), matrix.col_ptr, matrix.row_idx, matrix.values
        )
        assert row[0].tobytes() == batch[i].tobytes()


def test_route_identical(rng):
    X = gaussian(rng, 256, 20)
    index = mrpt.grow_trees(X, n_trees=8, depth=4, seed=3)
    for _ in range(50):
        q = gaussian(rng, 1, 20)[0]
        proj = np.stack([mrpt.project_query(q, index.matrices[t]) for t in range(8)])
        assert np.array_equal(_cy.route(proj, index.splits), _py.route(proj, index.splits))


def test_vote_identical(rng):
    X = gaussian(rng, 256, 20)
    index = mrpt.grow_trees(X, n_trees=8, depth=4, seed=3)
    n = index.n
    for v in (1, 2, 4):
        q = gaussian(rng, 1, 20)[0]
        proj = np.stack([mrpt.project_query(q, index.matrices[t]) for t in range(8)])
        leaves = _cy.route(proj, index.splits)
        results = {}
        for name, mod in (("cy", _cy), ("py", _py)):
            counts = np.zeros(n, dtype=np.int32)
            stamps = np.zeros(n, dtype=np.int64)
            out = np.empty(index.max_candidates(), dtype=np.int64)
            ncand = mod.vote(
                index.leaf_indices, index.leaf_offsets, leaves, v, counts, stamps, 1, out
            )
            valid = stamps == 1
            results[name] = (set(out[:ncand].tolist()), counts[valid].sum())
        assert results["cy"][0] == results["py"][0]
        assert results["cy"][1] == results["py"][1]


def test_scan_distances_close_and_order_identical(rng):
    X = gaussian(rng, 300, 32)
    cand = rng.choice(300, size=120, replace=False).astype(np.int64)
    q = gaussian(rng, 1, 32)[0]
    a = _cy.scan(X, cand, q)
    b = _py.scan(X, cand, q)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    assert np.array_equal(np.lexsort((cand, a)), np.lexsort((cand, b)))


def test_fnv_identical(rng):
    for size in (0, 1, 7, 1024):
        buf = rng.integers(0, 256, size=size).astype(np.uint8)
        assert _cy.fnv1a64(buf) == _py.fnv1a64(buf)


def test_backends_build_identical_indexes_and_answers(rng):
    X = gaussian(rng, 400, 24)
    with mrpt.using_kernel_backend("python"):
        py_index = mrpt.grow_trees(X, n_trees=6, depth=4, seed=13)
    with mrpt.using_kernel_backend("compiled"):
        cy_index = mrpt.grow_trees(X, n_trees=6, depth=4, seed=13)
    assert np.array_equal(py_index.splits, cy_index.splits)
    assert np.array_equal(py_index.leaf_indices, cy_index.leaf_indices)
    for q in gaussian(rng, 40, 24):
        with mrpt.using_kernel_backend("python"):
            a = mrpt.approximate_knn(q, 8, py_index, votes=2)
        with mrpt.using_kernel_backend("compiled"):
            b = mrpt.approximate_knn(q, 8, cy_index, votes=2)
        assert a.indices.tolist() == b.indices.tolist()
        assert a.candidate_count == b.candidate_count


def test_backend_switching_api():
    assert _kernels.backend() in ("compiled", "python")
    with mrpt.using_kernel_backend("python"):
        assert _kernels.backend() == "python"
    assert set(_kernels.available_backends()) == {"compiled", "python"}
    with pytest.raises(mrpt.ParameterError):
        _kernels.set_backend("gpu")
