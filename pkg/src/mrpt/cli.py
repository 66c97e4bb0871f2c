"""Command-line interface: build, ground-truth, query and bench subcommands."""

from __future__ import annotations

import argparse
import csv
import io as _io
import itertools
import json
import os
import sys
import time

import numpy as np

from . import _kernels
from .core import default_sparsity
from .evaluation import compute_ground_truth, run_benchmark
from .exceptions import MRPTError, ParameterError
from .io import atomic_write_bytes, load_vectors
from .persistence import load_index, save_index
from .search import approximate_knn
from .trees import grow_trees

__all__ = ["cli_main", "main"]

RESULT_COLUMNS = ("T", "depth", "sparsity", "votes", "k", "recall", "qtime_s",
                  "mean_candidates", "build_s")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mrpt",
        description="Approximate k-NN search with voting over sparse random projection trees.",
    )
    parser.add_argument(
        "--backend", choices=("auto",) + _kernels.available_backends(), default=None,
        help="kernel backend override (default: compiled when available)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build an index and save it to disk")
    p.add_argument("--data", required=True, help="dataset file (.fvecs/.bvecs/.csv)")
    p.add_argument("--out", required=True, help="output index file")
    p.add_argument("--trees", type=int, required=True, metavar="T")
    p.add_argument("--depth", type=int, required=True, metavar="L")
    p.add_argument("--sparsity", type=float, default=None,
                   help="projection density a in (0, 1]; default 1/sqrt(d)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixed-count", action="store_true",
                   help="exactly ceil(a*d) non-zeros per projection vector")
    p.add_argument("--format", choices=("fvecs", "bvecs", "csv"), default=None)
    p.set_defaults(func=_cmd_build, inputs=("data",))

    p = sub.add_parser("ground-truth", help="exact k-NN of each query, by brute force")
    p.add_argument("--data", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True, help="output .npz file")
    p.add_argument("--format", choices=("fvecs", "bvecs", "csv"), default=None)
    p.set_defaults(func=_cmd_ground_truth, inputs=("data", "queries"))

    p = sub.add_parser("query", help="run approximate k-NN queries against a saved index")
    p.add_argument("--index", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--votes", type=int, required=True)
    p.add_argument("--out", required=True, help="output CSV (query,rank,neighbor,distance)")
    p.add_argument("--format", choices=("fvecs", "bvecs", "csv"), default=None)
    p.set_defaults(func=_cmd_query, inputs=("index", "data", "queries"))

    p = sub.add_parser("bench", help="recall/latency sweep over a parameter grid")
    p.add_argument("--data", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--grid", required=True,
                   help="JSON grid file, or inline ranges like 'T=8,32;depth=4,6;votes=1,2'")
    p.add_argument("--out", required=True, help="output results CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--gt-cache", default=None, help="directory for cached ground truth")
    p.add_argument("--fixed-count", action="store_true")
    p.add_argument("--format", choices=("fvecs", "bvecs", "csv"), default=None)
    p.set_defaults(func=_cmd_bench, inputs=("data", "queries"))
    return parser


def parse_grid(spec):
    """Parse --grid: a JSON file (list of entries or ranges) or inline ranges.

    Inline form: semicolon-separated key=comma-list, e.g.
    ``T=8,32;depth=4;votes=1,2;sparsity=0.1``. Ranges are crossed into the
    full grid. Keys: T, depth, votes, sparsity (optional, default 1/sqrt(d)).
    """
    if os.path.exists(spec):
        with open(spec) as fh:
            loaded = json.load(fh)
        if isinstance(loaded, list):
            return loaded
        if isinstance(loaded, dict):
            return _cross_product({k: v if isinstance(v, list) else [v]
                                   for k, v in loaded.items()})
        raise ParameterError("grid JSON must be a list of entries or a dict of ranges")
    ranges = {}
    for clause in spec.split(";"):
        clause = clause.strip()
        if not clause:
            continue
        key, eq, values = clause.partition("=")
        if not eq or not values:
            raise ParameterError(f"bad grid clause {clause!r}; expected key=v1,v2,...")
        parse = float if key.strip() in ("sparsity", "a") else int
        try:
            ranges[key.strip()] = [parse(v) for v in values.split(",")]
        except ValueError as exc:
            raise ParameterError(f"bad grid clause {clause!r}: {exc}") from exc
    if not ranges:
        raise ParameterError(f"empty grid specification {spec!r}")
    return _cross_product(ranges)


def _cross_product(ranges):
    keys = list(ranges)
    return [dict(zip(keys, combo)) for combo in itertools.product(*ranges.values())]


def _load(args, name):
    return load_vectors(getattr(args, name), getattr(args, "format", None))


def _cmd_build(args):
    X = _load(args, "data")
    sparsity = args.sparsity if args.sparsity is not None else default_sparsity(X.d)
    t0 = time.perf_counter()
    index = grow_trees(X, args.trees, args.depth, sparsity, seed=args.seed,
                       fixed_count=args.fixed_count)
    build_s = time.perf_counter() - t0
    save_index(index, args.out)
    print(f"built {args.trees} trees of depth {args.depth} over {X.n} points "
          f"(a={sparsity:.6g}) in {build_s:.3f}s -> {args.out}")
    return 0


def _cmd_ground_truth(args):
    X = _load(args, "data")
    queries = _load(args, "queries")
    truth = compute_ground_truth(X, queries, args.k)
    buf = _io.BytesIO()
    np.savez(
        buf,
        indices=truth.indices,
        distances=truth.distances,
        k=np.int64(args.k),
        dataset_checksum=np.uint64(truth.dataset_checksum),
        query_checksum=np.uint64(truth.query_checksum),
    )
    atomic_write_bytes(args.out, buf.getvalue())
    print(f"ground truth for {queries.n} queries (k={args.k}) -> {args.out}")
    return 0


def _cmd_query(args):
    X = _load(args, "data")
    queries = _load(args, "queries")
    index = load_index(args.index, X)
    out = _io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("query", "rank", "neighbor", "distance"))
    for i in range(queries.n):
        result = approximate_knn(queries.row(i), args.k, index, args.votes)
        for rank, (idx, dist) in enumerate(zip(result.indices, result.distances)):
            writer.writerow((i, rank, int(idx), f"{dist:.9g}"))
    atomic_write_bytes(args.out, out.getvalue().encode("ascii"))
    print(f"{queries.n} queries (k={args.k}, v={args.votes}) -> {args.out}")
    return 0


def _format_field(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _cmd_bench(args):
    X = _load(args, "data")
    queries = _load(args, "queries")
    grid = parse_grid(args.grid)
    records = run_benchmark(
        X, queries, args.k, grid,
        seed=args.seed, cache_dir=args.gt_cache, repeats=args.repeats,
        fixed_count=args.fixed_count,
    )
    out = _io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in records:
        writer.writerow([
            r.trees, r.depth, _format_field(r.sparsity), r.votes, r.k,
            _format_field(r.recall), _format_field(r.qtime_s),
            _format_field(r.mean_candidates), _format_field(r.build_s),
        ])
        if r.failed:
            print(f"T={r.trees} depth={r.depth} v={r.votes}: FAILED ({r.error})",
                  file=sys.stderr)
        else:
            print(f"T={r.trees} depth={r.depth} a={r.sparsity:.4g} v={r.votes}: "
                  f"recall={r.recall:.4f} qtime={r.qtime_s:.4f}s "
                  f"mean|S|={r.mean_candidates:.1f} build={r.build_s:.3f}s")
    atomic_write_bytes(args.out, out.getvalue().encode("ascii"))
    print(f"wrote {len(records)} records -> {args.out}")
    return 0


def cli_main(argv=None):
    """Entry point; returns the process exit code.

    Exit 0 on success, 2 for usage problems (unknown flags, missing input
    files), 1 for data or parameter errors.
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    for name in getattr(args, "inputs", ()):
        path = getattr(args, name)
        if not os.path.exists(path):
            print(f"mrpt {args.command}: input file not found: {path}", file=sys.stderr)
            return 2
    try:
        if args.backend:
            _kernels.set_backend(args.backend)
        return int(args.func(args) or 0)
    except MRPTError as exc:
        print(f"mrpt {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"mrpt {args.command}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
