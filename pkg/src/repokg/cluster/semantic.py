"""Embedding-based clustering with quality-driven candidate selection.

Embeddings are reduced to a low dimension, a grid of partition (k-means) and
density (DBSCAN) candidates is generated, candidates that are too fractional,
too general, or leave too many files unsorted are rejected, and the best
survivor by silhouette score wins. When every candidate is rejected the files
collapse into a single cluster with a quality warning.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import DBSCAN, KMeans
from sklearn.decomposition import PCA
from sklearn.metrics import silhouette_score

from ..graph import KnowledgeGraph
from ..model import NodeKind
from .assign import ClusterAssignment, canonical_ids

log = logging.getLogger(__name__)

try:  # optional; the reducer falls back to PCA when not installed
    import umap  # type: ignore

    HAVE_UMAP = True
except ImportError:
    HAVE_UMAP = False


@dataclass
class SemanticClusterParams:
    target_dim: int = 8
    seed: int = 0
    reducer: str = "pca"  # "pca" | "umap"
    max_cluster_fraction: float = 1 / 3  # reject counts above ceil(n * fraction)
    min_clusters: int = 2
    max_unassigned_fraction: float = 0.4
    k_grid: list[int] | None = None
    dbscan_eps_grid: list[float] = field(default_factory=lambda: [0.25, 0.5, 0.75, 1.0])


def _reduce(vectors: np.ndarray, params: SemanticClusterParams) -> np.ndarray:
    n, dim = vectors.shape
    target = min(params.target_dim, dim, max(2, n - 1))
    if dim <= target or n <= 2:
        return vectors.astype(np.float64)
    if params.reducer == "umap" and HAVE_UMAP:
        reducer = umap.UMAP(n_components=target, random_state=params.seed)
        return np.asarray(reducer.fit_transform(vectors), dtype=np.float64)
    return PCA(n_components=target, random_state=params.seed).fit_transform(vectors)


def _candidate_labelings(reduced: np.ndarray, params: SemanticClusterParams):
    n = len(reduced)
    max_clusters = max(1, math.ceil(n * params.max_cluster_fraction))
    ks = params.k_grid
    if ks is None:
        upper = min(n - 1, max_clusters)
        ks = sorted({k for k in range(2, upper + 1)})
        if len(ks) > 12:
            step = max(1, len(ks) // 12)
            ks = ks[::step]
    for k in ks:
        if not 2 <= k <= n - 1:
            continue
        model = KMeans(n_clusters=k, random_state=params.seed, n_init=10)
        yield f"kmeans-k{k}", model.fit_predict(reduced)
    for eps in params.dbscan_eps_grid:
        labels = DBSCAN(eps=eps, min_samples=2).fit_predict(reduced)
        yield f"dbscan-eps{eps}", labels


def _evaluate(labels: np.ndarray, reduced: np.ndarray, params: SemanticClusterParams):
    n = len(labels)
    assigned_mask = labels >= 0
    unassigned = int(n - assigned_mask.sum())
    cluster_ids = sorted(set(labels[assigned_mask].tolist()))
    count = len(cluster_ids)
    max_clusters = max(1, math.ceil(n * params.max_cluster_fraction))
    if count > max_clusters:
        return None, "too fractional"
    if count < params.min_clusters:
        return None, "too general"
    if unassigned > params.max_unassigned_fraction * n:
        return None, "too many unsorted files"
    pts = reduced[assigned_mask]
    lbl = labels[assigned_mask]
    if len(set(lbl.tolist())) < 2 or len(pts) - 1 < len(set(lbl.tolist())):
        return None, "degenerate for scoring"
    score = float(silhouette_score(pts, lbl))
    return score, None


def semantic_cluster(
    paths: list[str],
    vectors: np.ndarray,
    params: SemanticClusterParams | None = None,
) -> ClusterAssignment:
    """Cluster files by embedding similarity; requires at least two files."""
    params = params or SemanticClusterParams()
    if len(paths) < 2:
        raise ValueError("semantic clustering needs at least two files with embeddings")
    vectors = np.asarray(vectors, dtype=np.float64)
    reduced = _reduce(vectors, params)
    best: tuple[float, int, str, np.ndarray] | None = None
    rejections: list[str] = []
    for name, labels in _candidate_labelings(reduced, params):
        score, rejection = _evaluate(labels, reduced, params)
        if rejection:
            rejections.append(f"{name}: {rejection}")
            continue
        count = len(set(labels[labels >= 0].tolist()))
        key = (score, -count, name, labels)
        if best is None or (key[0], key[1], key[2]) > (best[0], best[1], best[2]):
            best = key
    if best is None:
        files = {path: 1 for path in paths}
        assignment = ClusterAssignment(
            method="semantic",
            seed=params.seed,
            scope=list(paths),
            files=files,
            warnings=["all clustering candidates rejected; single-cluster fallback"]
            + rejections[:5],
        )
        return assignment
    score, _, name, labels = best
    raw = {path: int(label) for path, label in zip(paths, labels) if label >= 0}
    assignment = ClusterAssignment(
        method="semantic",
        seed=params.seed,
        scope=list(paths),
        files=canonical_ids(list(paths), raw),
        score=score,
    )
    assignment.warnings.append(f"selected {name}")
    return assignment


def semantic_cluster_graph(
    graph: KnowledgeGraph, params: SemanticClusterParams | None = None
) -> ClusterAssignment:
    files = sorted(
        (n for n in graph.nodes_by_kind(NodeKind.FILE) if n.description_embedding is not None),
        key=lambda n: n.path,
    )
    if len(files) < 2:
        raise ValueError("graph has fewer than two enriched files")
    matrix = np.stack([n.description_embedding for n in files]).astype(np.float64)
    return semantic_cluster([n.path for n in files], matrix, params)
