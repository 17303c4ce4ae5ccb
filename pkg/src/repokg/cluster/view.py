"""Undirected weighted file-graph projection used by the network clusterers.

Two files are connected with weight = number of Refers edges between them plus
Calls between their functions plus Tests relations, counted in both
directions. The CSR stores each undirected edge twice; diagonal entries (none
in this projection) would carry doubled weight per the usual convention.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..graph import KnowledgeGraph
from ..model import EdgeKind, NodeKind


@dataclass
class FileGraphView:
    paths: list[str]
    node_ids: list[str]
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.paths)

    def degree(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.float64)
        for i in range(self.n):
            out[i] = self.weights[self.indptr[i] : self.indptr[i + 1]].sum()
        return out

    def edges(self) -> list[tuple[int, int, float]]:
        seen = []
        for u in range(self.n):
            for e in range(self.indptr[u], self.indptr[u + 1]):
                v = int(self.indices[e])
                if u <= v:
                    seen.append((u, v, float(self.weights[e])))
        return seen


def view_from_pairs(paths: list[str], pair_weights: dict[tuple[int, int], float]) -> FileGraphView:
    n = len(paths)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (u, v), w in sorted(pair_weights.items()):
        if u == v or w <= 0:
            continue
        adj[u].append((v, float(w)))
        adj[v].append((u, float(w)))
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices, weights = [], []
    for i, row in enumerate(adj):
        for v, w in sorted(row):
            indices.append(v)
            weights.append(w)
        indptr[i + 1] = len(indices)
    return FileGraphView(
        paths=paths,
        node_ids=[""] * n,
        indptr=indptr,
        indices=np.asarray(indices, dtype=np.int64),
        weights=np.asarray(weights, dtype=np.float64),
    )


def file_graph_view(graph: KnowledgeGraph) -> FileGraphView:
    files = sorted(graph.nodes_by_kind(NodeKind.FILE), key=lambda n: n.path)
    index_of = {node.path: i for i, node in enumerate(files)}
    pair_weights: Counter = Counter()

    def bump(path_a: str, path_b: str) -> None:
        ia, ib = index_of.get(path_a), index_of.get(path_b)
        if ia is None or ib is None or ia == ib:
            return
        pair_weights[(min(ia, ib), max(ia, ib))] += 1

    for edge in graph.edges():
        if edge.kind not in (EdgeKind.REFERS, EdgeKind.CALLS, EdgeKind.TESTS):
            continue
        # entity nodes carry their defining file's path, so this covers both
        # file-level and function-level relations
        bump(graph.node(edge.src).path, graph.node(edge.dst).path)

    view = view_from_pairs([f.path for f in files], dict(pair_weights))
    view.node_ids = [f.id for f in files]
    return view
