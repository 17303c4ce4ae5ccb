"""Louvain community detection over the file-graph view.

Two phases repeated to a fixed point: local moving of nodes to the community
with the best modularity gain, then aggregation of communities into single
nodes whose edges carry the summed weights of the old communities' edges.
Node visiting order is fixed (index order), making results deterministic.
"""

from __future__ import annotations

import numpy as np

from .. import _kernels
from .assign import ClusterAssignment, canonical_ids
from .view import FileGraphView


def modularity(view: FileGraphView, assignment: dict[str, int] | np.ndarray) -> float:
    """Newman modularity Q = sum_c [in_c/(2m) - (tot_c/(2m))^2].

    ``in_c`` counts ordered in-community pairs (each undirected edge twice),
    matching the doubled-CSR storage. A graph with no edges scores 0.
    """
    if isinstance(assignment, dict):
        labels = np.array([assignment[p] for p in view.paths], dtype=np.int64)
    else:
        labels = np.asarray(assignment, dtype=np.int64)
    m2 = float(view.weights.sum())
    if m2 == 0.0:
        return 0.0
    communities = {}
    for idx, label in enumerate(labels):
        communities.setdefault(int(label), []).append(idx)
    q = 0.0
    degree = view.degree()
    for members in communities.values():
        member_set = set(members)
        in_c = 0.0
        tot_c = 0.0
        for u in members:
            tot_c += degree[u]
            for e in range(view.indptr[u], view.indptr[u + 1]):
                if int(view.indices[e]) in member_set:
                    in_c += float(view.weights[e])
        q += in_c / m2 - (tot_c / m2) ** 2
    return q


def _aggregate(indptr, indices, weights, labels, n_comm):
    agg: dict[tuple[int, int], float] = {}
    n = len(labels)
    for u in range(n):
        cu = int(labels[u])
        for e in range(indptr[u], indptr[u + 1]):
            cv = int(labels[indices[e]])
            agg[(cu, cv)] = agg.get((cu, cv), 0.0) + float(weights[e])
    new_indptr = np.zeros(n_comm + 1, dtype=np.int64)
    rows: list[list[tuple[int, float]]] = [[] for _ in range(n_comm)]
    for (cu, cv), w in sorted(agg.items()):
        rows[cu].append((cv, w))
    new_indices, new_weights = [], []
    for i, row in enumerate(rows):
        for v, w in row:
            new_indices.append(v)
            new_weights.append(w)
        new_indptr[i + 1] = len(new_indices)
    return new_indptr, np.asarray(new_indices, dtype=np.int64), np.asarray(new_weights, dtype=np.float64)


def louvain_partition(view: FileGraphView, resolution: float = 1.0) -> np.ndarray:
    """Community index per node after running Louvain to a fixed point.

    A refinement pass over the original nodes runs after the aggregation
    hierarchy converges, so at termination no single-node move can improve
    modularity (aggregation alone only guarantees that for whole communities).
    """
    n = view.n
    final = np.arange(n, dtype=np.int64)
    indptr, indices, weights = view.indptr, view.indices.copy(), view.weights.copy()
    level_n = n
    while True:
        degree = np.zeros(level_n, dtype=np.float64)
        for i in range(level_n):
            degree[i] = weights[indptr[i] : indptr[i + 1]].sum()
        m2 = float(degree.sum())
        if m2 == 0.0:
            break
        labels = np.arange(level_n, dtype=np.int64)
        tot = degree.copy()
        moved = False
        while _kernels.louvain_move_pass(indptr, indices, weights, labels, degree, tot, m2, resolution):
            moved = True
        uniq, compact = np.unique(labels, return_inverse=True)
        if not moved or len(uniq) == level_n:
            final = compact[final] if moved else final
            break
        final = compact[final]
        indptr, indices, weights = _aggregate(indptr, indices, weights, compact, len(uniq))
        level_n = len(uniq)

    degree = view.degree()
    m2 = float(degree.sum())
    if m2 > 0.0:
        labels = final.copy()
        tot = np.zeros(n, dtype=np.float64)
        for u in range(n):
            tot[int(labels[u])] += degree[u]
        while _kernels.louvain_move_pass(
            view.indptr, view.indices, view.weights, labels, degree, tot, m2, resolution
        ):
            pass
        final = labels
    _, canonical = np.unique(final, return_inverse=True)
    return canonical.astype(np.int64)


def louvain(view: FileGraphView, resolution: float = 1.0) -> ClusterAssignment:
    labels = louvain_partition(view, resolution)
    raw = {path: int(labels[i]) for i, path in enumerate(view.paths)}
    files = canonical_ids(view.paths, raw)
    assignment = ClusterAssignment(
        method="louvain", seed=0, scope=list(view.paths), files=files
    )
    assignment.score = modularity(view, labels)
    return assignment
