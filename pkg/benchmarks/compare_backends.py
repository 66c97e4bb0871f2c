#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Builds one index and runs one query batch under each backend, verifies the
answers are identical, and prints build/query timings with speedups.

    python benchmarks/compare_backends.py --n 20000 --d 96 --trees 32 \
        --depth 7 --votes 2 --k 10 --queries 200
"""

import argparse
import time

import numpy as np

import mrpt


def time_backend(name, X, queries, args):
    with mrpt.using_kernel_backend(name):
        t0 = time.perf_counter()
        index = mrpt.grow_trees(X, args.trees, args.depth, args.sparsity, seed=args.seed)
        build_s = time.perf_counter() - t0

        best = float("inf")
        answers = None
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            answers = [
                mrpt.approximate_knn(q, args.k, index, votes=args.votes).indices.tolist()
                for q in queries
            ]
            best = min(best, time.perf_counter() - t0)
    return build_s, best, answers


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=20000)
    parser.add_argument("--d", type=int, default=96)
    parser.add_argument("--trees", type=int, default=32)
    parser.add_argument("--depth", type=int, default=7)
    parser.add_argument("--votes", type=int, default=2)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--queries", type=int, default=200)
    parser.add_argument("--sparsity", type=float, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if "compiled" not in mrpt.available_kernel_backends():
        raise SystemExit("compiled kernels are not built; nothing to compare")

    rng = np.random.default_rng(args.seed)
    X = rng.standard_normal((args.n, args.d)).astype(np.float32)
    queries = rng.standard_normal((args.queries, args.d)).astype(np.float32)

    print(f"n={args.n} d={args.d} T={args.trees} depth={args.depth} "
          f"v={args.votes} k={args.k} queries={args.queries}")
    results = {}
    for name in ("python", "compiled"):
        build_s, query_s, answers = time_backend(name, X, queries, args)
        results[name] = (build_s, query_s, answers)
        qps = args.queries / query_s
        print(f"{name:>9}: build {build_s:8.3f}s   "
              f"queries {query_s:8.3f}s ({qps:8.1f} q/s)")

    if results["python"][2] != results["compiled"][2]:
        raise SystemExit("backends disagree on query results")
    build_speedup = results["python"][0] / results["compiled"][0]
    query_speedup = results["python"][1] / results["compiled"][1]
    print(f"identical answers; speedup: build {build_speedup:.1f}x, "
          f"queries {query_speedup:.1f}x")


if __name__ == "__main__":
    main()
