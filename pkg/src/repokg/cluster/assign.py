"""Cluster assignments: quality accounting, misc grouping, labeling."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..errors import ProviderError
from ..graph import KnowledgeGraph

MISC_CLUSTER_ID = 0
MISC_LABEL = "misc"


@dataclass
class ClusteringQuality:
    cluster_count: int
    sizes: list[int]
    unassigned: int
    score: float | None = None

    def as_dict(self) -> dict:
        return {
            "count": self.cluster_count,
            "sizes": self.sizes,
            "unassigned": self.unassigned,
            "score": self.score,
        }


@dataclass
class ClusterAssignment:
    method: str
    seed: int
    scope: list[str]  # every file considered, assigned or not
    files: dict[str, int]  # file path -> cluster id (misc is id 0)
    labels: dict[int, str | None] = field(default_factory=dict)
    score: float | None = None
    warnings: list[str] = field(default_factory=list)

    def members(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for path in sorted(self.files):
            out.setdefault(self.files[path], []).append(path)
        return out

    def quality(self) -> ClusteringQuality:
        sizes = sorted((len(v) for v in self.members().values()), reverse=True)
        return ClusteringQuality(
            cluster_count=len(sizes),
            sizes=sizes,
            unassigned=len(self.scope) - len(self.files),
            score=self.score,
        )

    def to_json(self) -> dict:
        clusters = [
            {"id": cid, "label": self.labels.get(cid), "files": paths}
            for cid, paths in sorted(self.members().items())
        ]
        return {
            "method": self.method,
            "seed": self.seed,
            "clusters": clusters,
            "quality": self.quality().as_dict(),
        }


def canonical_ids(scope: list[str], raw: dict[str, int]) -> dict[str, int]:
    """Renumber arbitrary cluster keys to 1..k ordered by first member path."""
    first_member: dict[int, str] = {}
    for path in sorted(raw):
        first_member.setdefault(raw[path], path)
    order = sorted(first_member, key=lambda cid: first_member[cid])
    remap = {old: i + 1 for i, old in enumerate(order)}
    return {path: remap[cid] for path, cid in raw.items()}


def misc_group(assignment: ClusterAssignment, min_size: int = 3) -> ClusterAssignment:
    """Merge unassigned files and clusters below ``min_size`` into cluster 0."""
    members = assignment.members()
    misc_paths = [p for p in assignment.scope if p not in assignment.files]
    survivors: dict[str, int] = {}
    for cid, paths in members.items():
        if cid != MISC_CLUSTER_ID and len(paths) >= min_size:
            for path in paths:
                survivors[path] = cid
        else:
            misc_paths.extend(paths)
    if not misc_paths:
        return assignment
    renumbered = canonical_ids(assignment.scope, survivors)
    files = dict(renumbered)
    for path in misc_paths:
        files[path] = MISC_CLUSTER_ID
    labels = {MISC_CLUSTER_ID: MISC_LABEL}
    reverse: dict[int, int] = {}
    for path, new_id in renumbered.items():
        reverse.setdefault(new_id, assignment.files[path])
    for new_id, old_id in reverse.items():
        if old_id in assignment.labels:
            labels[new_id] = assignment.labels[old_id]
    return ClusterAssignment(
        method=assignment.method,
        seed=assignment.seed,
        scope=list(assignment.scope),
        files=files,
        labels=labels,
        score=assignment.score,
        warnings=list(assignment.warnings),
    )


def _common_path_prefix(paths: list[str]) -> str:
    split = [p.split("/")[:-1] for p in paths]
    prefix: list[str] = []
    for segments in zip(*split):
        if all(s == segments[0] for s in segments):
            prefix.append(segments[0])
        else:
            break
    return "/".join(prefix)


def _top_name_token(paths: list[str]) -> str:
    counts: Counter = Counter()
    for path in paths:
        stem = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
        for token in stem.replace("-", "_").split("_"):
            if token:
                counts[token.lower()] += 1
    if not counts:
        return "cluster"
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[0][0]


def label_clusters(
    assignment: ClusterAssignment,
    graph: KnowledgeGraph | None = None,
    summarizer=None,
) -> ClusterAssignment:
    """Attach human-readable labels.

    With a provider the label is summarized from member descriptions; the
    offline fallback uses the longest common path prefix, else the most
    frequent file-name token. The misc cluster is always labeled "misc".
    """
    labels: dict[int, str | None] = {}
    for cid, paths in assignment.members().items():
        if cid == MISC_CLUSTER_ID:
            labels[cid] = MISC_LABEL
            continue
        label: str | None = None
        if summarizer is not None:
            try:
                pieces = []
                for path in paths[:20]:
                    node = graph.node_by_path(path) if graph is not None else None
                    pieces.append(node.description if node and node.description else path)
                label = summarizer.summarize("Cluster", f"cluster-{cid}", None, "\n".join(pieces))
            except ProviderError:
                label = None
        if not label:
            if len(paths) == 1:
                label = paths[0].rsplit("/", 1)[-1]
            else:
                label = _common_path_prefix(paths) or _top_name_token(paths)
        labels[cid] = label
    assignment.labels = labels
    return assignment
