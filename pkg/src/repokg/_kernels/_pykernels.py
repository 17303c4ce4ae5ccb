"""Pure-Python/numpy fallback implementations of the hot kernels.

Semantics mirror ``_ckernels.pyx`` exactly: identical visit orders, identical
tie-breaking, float64 accumulation.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def dot_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Row-wise dot products of a float32 matrix against a query vector."""
    mat = np.ascontiguousarray(matrix, dtype=np.float32)
    q = np.asarray(query, dtype=np.float64)
    return mat.astype(np.float64) @ q


def bfs_reachable(
    n: int,
    out_indptr: np.ndarray,
    out_indices: np.ndarray,
    out_kinds: np.ndarray,
    in_indptr: np.ndarray,
    in_indices: np.ndarray,
    in_kinds: np.ndarray,
    seeds: np.ndarray,
    kind_mask: int,
    depth: int,
    use_out: bool,
    use_in: bool,
) -> np.ndarray:
    """Nodes within ``depth`` hops of any seed along edges whose kind bit is set.

    Returns a sorted int32 array of reached node indices, seeds excluded.
    """
    dist = np.full(n, -1, dtype=np.int32)
    queue: deque[int] = deque()
    for s in seeds:
        dist[s] = 0
        queue.append(int(s))
    reached = []
    while queue:
        u = queue.popleft()
        d = dist[u]
        if d >= depth:
            continue
        for indptr, indices, kinds, enabled in (
            (out_indptr, out_indices, out_kinds, use_out),
            (in_indptr, in_indices, in_kinds, use_in),
        ):
            if not enabled:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                if not (kind_mask >> int(kinds[e])) & 1:
                    continue
                v = int(indices[e])
                if dist[v] < 0:
                    dist[v] = d + 1
                    reached.append(v)
                    queue.append(v)
    return np.array(sorted(reached), dtype=np.int32)


def louvain_move_pass(
    indptr: np.ndarray,
    indices: np.ndarray,
    weights: np.ndarray,
    labels: np.ndarray,
    degree: np.ndarray,
    tot: np.ndarray,
    m2: float,
    resolution: float,
) -> int:
    """One local-moving pass over all nodes in index order; returns move count.

    ``labels`` and ``tot`` are updated in place. Candidate communities are
    evaluated in first-seen neighbor order; a move happens only on a strict
    modularity gain over staying put.
    """
    n = len(labels)
    moves = 0
    for u in range(n):
        c_old = int(labels[u])
        k_u = float(degree[u])
        tot[c_old] -= k_u
        comm_w: dict[int, float] = {c_old: 0.0}
        for e in range(indptr[u], indptr[u + 1]):
            v = int(indices[e])
            if v == u:
                continue
            c = int(labels[v])
            comm_w[c] = comm_w.get(c, 0.0) + float(weights[e])
        best_c = c_old
        best_gain = comm_w[c_old] - resolution * float(tot[c_old]) * k_u / m2
        for c, w in comm_w.items():
            if c == c_old:
                continue
            gain = w - resolution * float(tot[c]) * k_u / m2
            if gain > best_gain:
                best_gain = gain
                best_c = c
        labels[u] = best_c
        tot[best_c] += k_u
        if best_c != c_old:
            moves += 1
    return moves


def labelprop_sweep(
    indptr: np.ndarray,
    indices: np.ndarray,
    weights: np.ndarray,
    labels: np.ndarray,
    order: np.ndarray,
    tie_rand: np.ndarray,
) -> int:
    """One asynchronous label-propagation sweep; returns number of relabels.

    Each node adopts the neighbor label with the highest total edge weight.
    The current label is kept when it ties for the maximum; otherwise the
    tied candidates are sorted and picked by ``tie_rand[node] % len``.
    """
    changed = 0
    for u_ in order:
        u = int(u_)
        label_w: dict[int, float] = {}
        for e in range(indptr[u], indptr[u + 1]):
            v = int(indices[e])
            if v == u:
                continue
            lv = int(labels[v])
            label_w[lv] = label_w.get(lv, 0.0) + float(weights[e])
        if not label_w:
            continue
        max_w = max(label_w.values())
        candidates = sorted(l for l, w in label_w.items() if w == max_w)
        current = int(labels[u])
        if current in candidates:
            continue
        labels[u] = candidates[int(tie_rand[u]) % len(candidates)]
        changed += 1
    return changed
