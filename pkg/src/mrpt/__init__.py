"""Approximate k-nearest-neighbor search with multiple random projection trees.

An index is a set of T trees, each splitting the data at the median of its
projections onto one sparse random vector per level. A query descends every
tree; points that share its leaf in at least ``votes`` trees form the
candidate set, which is then scanned exactly. Hot kernels run in a compiled
extension when available and fall back to numpy otherwise (see
``mrpt.kernel_backend``).
"""

from ._kernels import (
    available_backends as available_kernel_backends,
    backend as kernel_backend,
    set_backend as set_kernel_backend,
    using_backend as using_kernel_backend,
)
from .core import (
    Dataset,
    MacCounter,
    SparseProjectionMatrix,
    as_dataset,
    count_macs,
    default_sparsity,
    euclidean_distance,
    project_dataset,
    project_query,
    sample_sparse_matrix,
)
from .evaluation import (
    BenchmarkRecord,
    GroundTruth,
    brute_force_knn,
    compute_ground_truth,
    pareto_frontier,
    recall,
    run_benchmark,
)
from .exceptions import (
    ChecksumMismatchError,
    DepthError,
    FormatError,
    IntegrityError,
    MRPTError,
    ParameterError,
    ShapeError,
)
from .io import load_vectors, save_vectors
from .persistence import load_index, save_index
from .search import (
    NeighborList,
    VoteAccumulator,
    approximate_knn,
    candidate_set,
    exact_knn_in_set,
    tree_query,
)
from .trees import MRPTIndex, RPTree, build_tree, grow_trees, median_split

__version__ = "0.1.0"

__all__ = [
    "BenchmarkRecord",
    "ChecksumMismatchError",
    "Dataset",
    "DepthError",
    "FormatError",
    "GroundTruth",
    "IntegrityError",
    "MRPTError",
    "MRPTIndex",
    "MacCounter",
    "NeighborList",
    "ParameterError",
    "RPTree",
    "ShapeError",
    "SparseProjectionMatrix",
    "VoteAccumulator",
    "approximate_knn",
    "as_dataset",
    "available_kernel_backends",
    "brute_force_knn",
    "build_tree",
    "candidate_set",
    "compute_ground_truth",
    "count_macs",
    "default_sparsity",
    "euclidean_distance",
    "exact_knn_in_set",
    "grow_trees",
    "kernel_backend",
    "load_index",
    "load_vectors",
    "median_split",
    "pareto_frontier",
    "project_dataset",
    "project_query",
    "recall",
    "run_benchmark",
    "sample_sparse_matrix",
    "save_index",
    "save_vectors",
    "set_kernel_backend",
    "tree_query",
    "using_kernel_backend",
]
