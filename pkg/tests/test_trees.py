"""Tree construction: median splits, partitions, balance, determinism."""

import numpy as np
import pytest

from mrpt import (
    Dataset,
    DepthError,
    ParameterError,
    build_tree,
    grow_trees,
    median_split,
)

from conftest import gaussian


def leaf_contents(index, t):
    tree = index.tree(t)
    return [tree.leaf(i) for i in range(tree.n_leaves)]


# --- median_split -----------------------------------------------------------


def test_median_split_four_values():
    split, left, right = median_split(
        np.array([3.0, 1.0, 2.0, 4.0]), np.array([0, 1, 2, 3])
    )
    assert split == 2.0
    assert set(left) == {1, 2}
    assert set(right) == {0, 3}


def test_median_split_odd_count_uses_lower_median():
    split, left, right = median_split(
        np.array([5.0, 4.0, 3.0, 2.0, 1.0]), np.arange(5)
    )
    assert split == 3.0
    assert len(left) == 3 and len(right) == 2


def test_median_split_all_ties_sends_everything_left():
    split, left, right = median_split(np.array([7.0, 7.0]), np.array([0, 1]))
    assert split == 7.0
    assert set(left) == {0, 1} and len(right) == 0


def test_median_split_requires_two_entries():
    with pytest.raises(ParameterError):
        median_split(np.array([1.0]), np.array([0]))


def test_median_split_matches_sort_oracle(rng):
    for _ in range(50):
        m = int(rng.integers(2, 40))
        values = rng.standard_normal(m).astype(np.float32)
        split, left, right = median_split(values, np.arange(m))
        ordered = np.sort(values)
        assert split == ordered[(m + 1) // 2 - 1]
        assert set(left) == set(np.flatnonzero(values <= split))
        assert set(right) == set(np.flatnonzero(values > split))
        if len(np.unique(values)) == m:
            assert len(left) == (m + 1) // 2


def test_median_split_membership_ignores_index_order(rng):
    values = np.array([2.0, 1.0, 2.0, 0.5], dtype=np.float32)
    _, left_a, _ = median_split(values, np.array([0, 1, 2, 3]))
    _, left_b, _ = median_split(values[::-1].copy(), np.array([3, 2, 1, 0]))
    assert set(left_a) == set(left_b)


# --- build_tree -------------------------------------------------------------


def test_zero_depth_returns_given_indices_as_single_leaf(rng):
    P = gaussian(rng, 6, 1)
    splits, offsets, order = build_tree(P, depth=0, indices=[3, 1, 4])
    assert splits.size == 0
    assert list(offsets) == [0, 3]
    assert list(order) == [3, 1, 4]


def test_single_level_split_by_hand():
    P = np.array([[1.0], [2.0], [3.0], [4.0]], dtype=np.float32)
    splits, offsets, order = build_tree(P, depth=1)
    assert splits.tolist() == [2.0]
    assert set(order[offsets[0]:offsets[1]]) == {0, 1}
    assert set(order[offsets[1]:offsets[2]]) == {2, 3}


def test_degenerate_split_leaves_right_child_empty():
    P = np.full((4, 1), 7.0, dtype=np.float32)
    splits, offsets, order = build_tree(P, depth=1)
    assert splits.tolist() == [7.0]
    assert offsets.tolist() == [0, 4, 4]
    assert set(order) == {0, 1, 2, 3}


def test_deep_degenerate_tree_still_partitions():
    # all projections equal at level 0, distinct at level 1
    P = np.array(
        [[5.0, 1.0], [5.0, 2.0], [5.0, 3.0], [5.0, 4.0]], dtype=np.float32
    )
    splits, offsets, order = build_tree(P, depth=2)
    sizes = np.diff(offsets)
    assert sizes.sum() == 4
    assert sorted(order.tolist()) == [0, 1, 2, 3]
    # right subtree of the degenerate root is empty
    assert sizes[2] == 0 and sizes[3] == 0


# --- grow_trees -------------------------------------------------------------


def test_full_depth_gives_singleton_leaves(rng):
    X = gaussian(rng, 8, 5)
    index = grow_trees(X, n_trees=2, depth=3, sparsity=1.0, seed=11)
    for t in range(2):
        leaves = leaf_contents(index, t)
        assert all(len(leaf) == 1 for leaf in leaves)
        assert sorted(np.concatenate(leaves).tolist()) == list(range(8))


def test_depth_beyond_log2_n_rejected(rng):
    X = gaussian(rng, 8, 5)
    with pytest.raises(DepthError):
        grow_trees(X, n_trees=1, depth=4, seed=0)
    with pytest.raises(DepthError):
        grow_trees(X, n_trees=1, depth=0, seed=0)


def test_tree_count_must_be_positive(rng):
    with pytest.raises(ParameterError):
        grow_trees(gaussian(rng, 8, 5), n_trees=0, depth=2, seed=0)


def test_same_seed_builds_identical_indexes(rng):
    X = gaussian(rng, 64, 10)
    a = grow_trees(X, n_trees=4, depth=4, seed=123)
    b = grow_trees(X, n_trees=4, depth=4, seed=123)
    assert np.array_equal(a.splits, b.splits)
    assert np.array_equal(a.leaf_offsets, b.leaf_offsets)
    assert np.array_equal(a.leaf_indices, b.leaf_indices)
    for Ra, Rb in zip(a.matrices, b.matrices):
        assert Ra.values.tobytes() == Rb.values.tobytes()
        assert np.array_equal(Ra.row_idx, Rb.row_idx)


def test_threaded_build_matches_serial(rng):
    X = gaussian(rng, 128, 12)
    serial = grow_trees(X, n_trees=6, depth=4, seed=5, threads=1)
    threaded = grow_trees(X, n_trees=6, depth=4, seed=5, threads=4)
    assert np.array_equal(serial.splits, threaded.splits)
    assert np.array_equal(serial.leaf_indices, threaded.leaf_indices)


def test_mrpt_threads_env_is_honored(rng, monkeypatch):
    X = gaussian(rng, 64, 8)
    monkeypatch.setenv("MRPT_THREADS", "3")
    env_built = grow_trees(X, n_trees=5, depth=3, seed=9)
    monkeypatch.delenv("MRPT_THREADS")
    assert np.array_equal(env_built.splits, grow_trees(X, 5, 3, seed=9).splits)


def test_trees_use_distinct_matrices(rng):
    X = gaussian(rng, 32, 8)
    index = grow_trees(X, n_trees=3, depth=2, sparsity=1.0, seed=4)
    blobs = {index.matrices[t].values.tobytes() for t in range(3)}
    assert len(blobs) == 3


def test_leaves_partition_all_points(rng):
    for _ in range(20):
        n = int(rng.integers(2, 400))
        max_depth = int(np.floor(np.log2(n)))
        depth = int(rng.integers(1, max_depth + 1))
        X = gaussian(rng, n, 6)
        index = grow_trees(X, n_trees=2, depth=depth, seed=int(rng.integers(1 << 30)))
        for t in range(2):
            tree = index.tree(t)
            combined = np.sort(tree.leaf_indices)
            assert np.array_equal(combined, np.arange(n))


def test_leaf_sizes_balanced_on_continuous_data(rng):
    # dense projections: a Bernoulli-sparse column can be all-zero at small d,
    # which degenerates the split and voids the balance guarantee
    for _ in range(10):
        n = int(rng.integers(16, 600))
        depth = int(rng.integers(1, 5))
        X = gaussian(rng, n, 12)
        index = grow_trees(X, n_trees=3, depth=depth, sparsity=1.0,
                           seed=int(rng.integers(1 << 30)))
        lo, hi = n // 2 ** depth, -(-n // 2 ** depth)
        for t in range(3):
            sizes = index.tree(t).leaf_sizes()
            assert set(np.unique(sizes)).issubset({lo, hi})


def test_duplicate_points_keep_partition_but_not_balance():
    X = np.ones((16, 4), dtype=np.float32)
    index = grow_trees(Dataset(X), n_trees=2, depth=3, seed=1)
    for t in range(2):
        assert np.array_equal(np.sort(index.tree(t).leaf_indices), np.arange(16))
        # the all-ties rule piles everything into the leftmost leaf
        assert index.tree(t).leaf_sizes()[0] == 16


def test_index_memory_accounting(rng):
    X = gaussian(rng, 64, 10)
    index = grow_trees(X, n_trees=4, depth=4, seed=2)
    total = index.memory_bytes()
    assert total > 0
    assert total >= index.splits.nbytes + index.leaf_indices.nbytes
