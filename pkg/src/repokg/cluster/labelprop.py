"""Asynchronous label propagation with seeded shuffling and tie-breaking.

Plain label propagation is notoriously run-to-run unstable because of its
random choices; here every random draw comes from one seeded generator, so a
(graph, seed) pair always yields the same assignment.
"""

from __future__ import annotations

import numpy as np

from .. import _kernels
from .assign import ClusterAssignment, canonical_ids
from .view import FileGraphView

MAX_SWEEPS = 100


def label_propagation_partition(view: FileGraphView, seed: int = 0) -> np.ndarray:
    n = view.n
    labels = np.arange(n, dtype=np.int64)
    if n == 0:
        return labels
    rng = np.random.default_rng(seed)
    for _ in range(MAX_SWEEPS):
        order = rng.permutation(n).astype(np.int64)
        tie_rand = rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64)
        changed = _kernels.labelprop_sweep(
            view.indptr, view.indices, view.weights, labels, order, tie_rand
        )
        if changed == 0:
            break
    return labels


def label_propagation(view: FileGraphView, seed: int = 0) -> ClusterAssignment:
    labels = label_propagation_partition(view, seed)
    raw = {path: int(labels[i]) for i, path in enumerate(view.paths)}
    return ClusterAssignment(
        method="label-propagation",
        seed=seed,
        scope=list(view.paths),
        files=canonical_ids(view.paths, raw),
    )


def is_fixed_point(view: FileGraphView, labels: np.ndarray) -> bool:
    """Every node's label is among the most frequent labels of its neighbors."""
    for u in range(view.n):
        weight_of: dict[int, float] = {}
        for e in range(view.indptr[u], view.indptr[u + 1]):
            v = int(view.indices[e])
            if v == u:
                continue
            weight_of[int(labels[v])] = weight_of.get(int(labels[v]), 0.0) + float(view.weights[e])
        if not weight_of:
            continue
        best = max(weight_of.values())
        winners = {label for label, w in weight_of.items() if w == best}
        if int(labels[u]) not in winners:
            return False
    return True
