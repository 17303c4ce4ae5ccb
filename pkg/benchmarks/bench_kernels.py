#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the four hot kernels on synthetic inputs at a few scales and prints a
table of per-call times and speedups. Force the fallback for an end-to-end
comparison of the whole package with REPOKG_PURE_PYTHON=1.

Usage: python benchmarks/bench_kernels.py [--scale small|medium|large]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from repokg._kernels import _pykernels

try:
    from repokg._kernels import _ckernels
except ImportError:
    _ckernels = None

SCALES = {
    "small": {"nodes": 2_000, "edges": 10_000, "dim": 128, "rows": 2_000},
    "medium": {"nodes": 16_700, "edges": 165_000, "dim": 256, "rows": 16_700},
    "large": {"nodes": 50_000, "edges": 600_000, "dim": 384, "rows": 50_000},
}


def build_symmetric_csr(rng, n, m):
    pairs = set()
    while len(pairs) < m:
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        if u != v:
            pairs.add((min(u, v), max(u, v)))
    adj = [[] for _ in range(n)]
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = []
    for i, row in enumerate(adj):
        indices.extend(sorted(row))
        indptr[i + 1] = len(indices)
    indices = np.array(indices, dtype=np.int64)
    weights = np.ones(len(indices), dtype=np.float64)
    return indptr, indices, weights


def build_directed(rng, n, m):
    out = [[] for _ in range(n)]
    inn = [[] for _ in range(n)]
    for _ in range(m):
        u, v = int(rng.integers(0, n)), int(rng.integers(0, n))
        kind = int(rng.integers(0, 6))
        out[u].append((v, kind))
        inn[v].append((u, kind))

    def pack(rows):
        indptr = np.zeros(n + 1, dtype=np.int64)
        idx, kinds = [], []
        for i, row in enumerate(rows):
            for v, kind in row:
                idx.append(v)
                kinds.append(kind)
            indptr[i + 1] = len(idx)
        return indptr, np.array(idx, dtype=np.int64), np.array(kinds, dtype=np.int8)

    return pack(out), pack(inn)


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", choices=sorted(SCALES), default="medium")
    args = parser.parse_args()
    params = SCALES[args.scale]
    rng = np.random.default_rng(0)
    n, m, dim = params["nodes"], params["edges"], params["dim"]

    matrix = rng.standard_normal((params["rows"], dim)).astype(np.float32)
    query = rng.standard_normal(dim)
    indptr, indices, weights = build_symmetric_csr(rng, n, m // 2)
    (optr, oidx, oknd), (iptr, iidx, iknd) = build_directed(rng, n, m)
    seeds = np.arange(0, n, max(1, n // 50), dtype=np.int64)[:50]
    degree = np.array([weights[indptr[i]:indptr[i + 1]].sum() for i in range(n)])
    m2 = float(degree.sum())
    order = rng.permutation(n).astype(np.int64)
    tie = rng.integers(0, 2**63, size=n, dtype=np.uint64)

    def bench(impl):
        rows = {}
        rows["dot_scores"] = timeit(lambda: impl.dot_scores(matrix, query))
        rows["bfs_reachable"] = timeit(
            lambda: impl.bfs_reachable(n, optr, oidx, oknd, iptr, iidx, iknd,
                                       seeds, 0b111111, 3, True, True)
        )

        def louvain_pass():
            labels = np.arange(n, dtype=np.int64)
            tot = degree.copy()
            impl.louvain_move_pass(indptr, indices, weights, labels, degree, tot, m2, 1.0)

        rows["louvain_move_pass"] = timeit(louvain_pass)

        def lp_sweep():
            labels = np.arange(n, dtype=np.int64)
            impl.labelprop_sweep(indptr, indices, weights, labels, order, tie)

        rows["labelprop_sweep"] = timeit(lp_sweep)
        return rows

    python_rows = bench(_pykernels)
    compiled_rows = bench(_ckernels) if _ckernels is not None else None

    print(f"scale={args.scale}: {n} nodes, {m} edges, dim {dim}\n")
    header = f"{'kernel':<20}{'python':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, py_time in python_rows.items():
        if compiled_rows is None:
            print(f"{name:<20}{py_time * 1000:>10.2f}ms{'-':>12}{'-':>10}")
        else:
            c_time = compiled_rows[name]
            speedup = py_time / c_time if c_time > 0 else float("inf")
            print(f"{name:<20}{py_time * 1000:>10.2f}ms{c_time * 1000:>10.2f}ms{speedup:>9.1f}x")
    if compiled_rows is None:
        print("\ncompiled extension not built; showing fallback only")


if __name__ == "__main__":
    main()
