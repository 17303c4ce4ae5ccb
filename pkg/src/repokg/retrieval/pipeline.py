"""The search-relevant pipeline: semantic scan, graph expansion, discovery.

Stages: (1) query preprocessing, (2) full-scan cosine ranking of enriched
nodes, (3) traversal expansion from function hits to their callers and
defining files, (4) discovery of files mentioned verbatim in the query.
Non-File hits are mapped to their defining File; files mentioned in the query
rank first, the rest order by their best contributing semantic score.
"""

from __future__ import annotations

import re
import time
import weakref
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import EnrichmentError, ProviderError, UnknownNodeError
from ..graph import KnowledgeGraph
from ..model import EdgeKind, FUNCTION_KINDS, Node, NodeKind
from .preprocess import PreprocessMode, QueryBundle, preprocess_query

DEFAULT_SEARCH_KINDS = frozenset(
    {NodeKind.FILE, NodeKind.CLASS, NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION}
)


@dataclass
class RankedHit:
    node: str
    score: float
    stage_provenance: set[str]
    rank: int


@dataclass
class TraversalConfig:
    edge_kinds: set[EdgeKind] | None = None
    node_kinds: set[NodeKind] | None = None
    direction: str = "incoming"
    depth: int = 1


@dataclass
class RetrievalRequest:
    query_text: str
    mode: PreprocessMode = PreprocessMode.NONE
    k: int = 50
    budget_fraction: float | None = None
    traversal_config: TraversalConfig | None = None  # None selects the caller/file recipe
    enable_traversal: bool = True
    enable_discovery: bool = True
    search_node_kinds: frozenset[NodeKind] | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.budget_fraction is not None and not (0.0 < self.budget_fraction <= 1.0):
            raise ValueError("budget_fraction must lie in (0, 1]")


@dataclass
class SearchProviders:
    embedder: object
    preprocessor: object | None = None
    suggester: object | None = None


@dataclass
class FileResult:
    path: str
    file_id: str
    score: float | None
    rank: int
    provenance: list[str]
    evidence: list[str]


@dataclass
class SearchResponse:
    results: list[FileResult]
    diagnostics: dict

    def to_json(self) -> dict:
        return {
            "results": [
                {
                    "path": r.path,
                    "score": r.score,
                    "rank": r.rank,
                    "provenance": r.provenance,
                    "evidence_nodes": r.evidence,
                }
                for r in self.results
            ],
            "diagnostics": self.diagnostics,
        }


# --------------------------------------------------------------- vector index

_index_cache: "weakref.WeakKeyDictionary[KnowledgeGraph, tuple]" = weakref.WeakKeyDictionary()


def _vector_index(graph: KnowledgeGraph, kinds: frozenset[NodeKind]):
    cached = _index_cache.get(graph)
    if cached is not None and cached[0] == graph.updated_at and kinds in cached[1]:
        return cached[1][kinds]
    nodes = [
        node
        for node in graph.nodes()
        if node.kind in kinds
        and (node.description_embedding is not None or node.code_embedding is not None)
    ]
    nodes.sort(key=lambda n: (n.path, n.id))
    if nodes:
        matrix = np.stack(
            [
                n.description_embedding
                if n.description_embedding is not None
                else n.code_embedding
                for n in nodes
            ]
        ).astype(np.float32)
    else:
        matrix = np.zeros((0, graph.embedding_dim or 1), dtype=np.float32)
    entry = (nodes, matrix)
    if cached is None or cached[0] != graph.updated_at:
        _index_cache[graph] = (graph.updated_at, {kinds: entry})
    else:
        cached[1][kinds] = entry
    return entry


def semantic_search(
    graph: KnowledgeGraph,
    bundle: QueryBundle,
    node_kinds: frozenset[NodeKind] | None = None,
    limit: int = 50,
) -> list[RankedHit]:
    """Full-scan cosine ranking of enriched nodes against the query bundle.

    With several query embeddings (selective mode) each node scores the max
    over them. Ties break by ascending path, then node id.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if not bundle.embeddings:
        raise ValueError("query bundle carries no embeddings")
    kinds = node_kinds if node_kinds is not None else DEFAULT_SEARCH_KINDS
    nodes, matrix = _vector_index(graph, frozenset(kinds))
    if not nodes:
        return []
    best = None
    for vec in bundle.embeddings:
        scores = _kernels.dot_scores(matrix, np.asarray(vec, dtype=np.float64))
        best = scores if best is None else np.maximum(best, scores)
    order = sorted(range(len(nodes)), key=lambda i: (-best[i], nodes[i].path, nodes[i].id))
    top = order[: min(limit, len(order))]
    return [
        RankedHit(node=nodes[i].id, score=float(best[i]), stage_provenance={"semantic"}, rank=r + 1)
        for r, i in enumerate(top)
    ]


# ----------------------------------------------------------------- traversal


def containing_file(graph: KnowledgeGraph, node: Node) -> Node | None:
    """Map an entity to its defining File via incoming Implements, falling
    back to incoming Contains."""
    current = node
    for _ in range(len(graph._nodes) + 1):
        if current.kind is NodeKind.FILE:
            return current
        if current.kind in (NodeKind.FOLDER, NodeKind.ROOT):
            return None
        parents = [src for src, _ in graph.in_edges(current.id, EdgeKind.IMPLEMENTS)]
        if not parents:
            parents = [src for src, _ in graph.in_edges(current.id, EdgeKind.CONTAINS)]
        if not parents:
            if current.parent_id and current.parent_id in graph:
                current = graph.node(current.parent_id)
                continue
            return None
        current = graph.node(sorted(parents)[0])
    return None


def _normalize_hits(hits) -> list[tuple[str, float]]:
    out = []
    for hit in hits:
        if isinstance(hit, RankedHit):
            out.append((hit.node, hit.score))
        elif isinstance(hit, tuple):
            out.append((hit[0], float(hit[1])))
        else:
            out.append((hit, 0.0))
    return out


def _expand_with_sources(
    graph: KnowledgeGraph,
    hits,
    config: TraversalConfig | None = None,
) -> dict[str, float]:
    """Expansion additions mapped to the best score of a spawning hit."""
    pairs = _normalize_hits(hits)
    for node_id, _ in pairs:
        if node_id not in graph:
            raise UnknownNodeError(node_id)
    pairs.sort(key=lambda p: (-p[1], graph.node(p[0]).path, p[0]))
    additions: dict[str, float] = {}
    hit_ids = {node_id for node_id, _ in pairs}
    if config is None:
        # callers one Calls hop upstream, then defining files of every function
        functions: list[tuple[str, float]] = []
        for node_id, score in pairs:
            if graph.node(node_id).kind in FUNCTION_KINDS:
                functions.append((node_id, score))
                for caller, _ in graph.in_edges(node_id, EdgeKind.CALLS):
                    if caller not in additions:
                        additions[caller] = score
        for node_id, score in functions + [
            (nid, s) for nid, s in additions.items() if graph.node(nid).kind in FUNCTION_KINDS
        ]:
            file_node = containing_file(graph, graph.node(node_id))
            if file_node is not None and file_node.id not in additions:
                additions[file_node.id] = score
    else:
        for node_id, score in pairs:
            reached = graph.neighbors(
                {node_id},
                config.edge_kinds,
                config.direction,
                config.depth,
                config.node_kinds,
            )
            for found in reached:
                if found not in additions:
                    additions[found] = score
    return {nid: s for nid, s in additions.items() if nid not in hit_ids}


def traverse_expand(graph: KnowledgeGraph, hits, config: TraversalConfig | None = None) -> set[str]:
    """Structurally connected nodes to add to the hit set (hits excluded)."""
    return set(_expand_with_sources(graph, hits, config))


# ----------------------------------------------------------------- discovery

_PATH_TOKEN = re.compile(r"[\w\-./\\]*[\w\-]\.[A-Za-z][A-Za-z0-9]{0,7}")
_TRACEBACK_REF = re.compile(r'File "([^"]+)"')


def _candidate_tokens(query: str) -> list[str]:
    tokens = set(_TRACEBACK_REF.findall(query))
    for match in _PATH_TOKEN.findall(query):
        tokens.add(match)
    cleaned = set()
    for token in tokens:
        token = token.replace("\\", "/").strip("\"'`()[]{}<>,:;")
        while token.startswith("./"):
            token = token[2:]
        if token and "." in token.rsplit("/", 1)[-1]:
            cleaned.add(token)
    return sorted(cleaned)


def discover_mentioned_files(query: str, graph: KnowledgeGraph, suggester=None) -> set[str]:
    """File nodes whose paths are mentioned in the query text.

    Rule-based extraction matches path-like tokens and traceback references
    against graph paths by longest suffix of path segments; an optional
    provider can suggest further paths, filtered to existing File nodes.
    """
    by_segments: dict[tuple[str, ...], list[str]] = {}
    for node in graph.nodes_by_kind(NodeKind.FILE):
        by_segments.setdefault(tuple(node.path.split("/")), []).append(node.id)
    found: set[str] = set()
    for token in _candidate_tokens(query):
        segments = tuple(token.split("/"))
        for length in range(len(segments), 0, -1):
            suffix = segments[-length:]
            matches = [
                nid
                for segs, ids in by_segments.items()
                if len(segs) >= length and segs[-length:] == suffix
                for nid in ids
            ]
            if matches:
                found.update(matches)
                break
    if suggester is not None:
        try:
            for path in suggester.suggest_paths(query):
                node = graph.node_by_path(str(path).strip())
                if node is not None and node.kind is NodeKind.FILE:
                    found.add(node.id)
        except ProviderError:
            pass
    return found


# ------------------------------------------------------------ full pipeline


def search_relevant(
    graph: KnowledgeGraph,
    request: RetrievalRequest,
    providers: SearchProviders,
) -> SearchResponse:
    """Run the full pipeline and return ranked files with provenance."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    bundle = preprocess_query(
        request.query_text, request.mode, providers.preprocessor, providers.embedder
    )
    timings["preprocess"] = (time.perf_counter() - t0) * 1000.0

    file_count = len(graph.nodes_by_kind(NodeKind.FILE))
    if request.budget_fraction is not None:
        limit = max(1, round(request.budget_fraction * file_count))
    else:
        limit = max(1, 4 * request.k)
    t0 = time.perf_counter()
    kinds = request.search_node_kinds or DEFAULT_SEARCH_KINDS
    hits = semantic_search(graph, bundle, kinds, limit)
    timings["semantic"] = (time.perf_counter() - t0) * 1000.0
    if not hits:
        raise EnrichmentError("graph has no enriched nodes to search")

    entries: dict[str, dict] = {}

    def entry_for(file_node: Node) -> dict:
        return entries.setdefault(
            file_node.id,
            {"path": file_node.path, "score": None, "stages": set(), "evidence": set()},
        )

    for hit in hits:
        node = graph.node(hit.node)
        file_node = containing_file(graph, node)
        if file_node is None:
            continue
        entry = entry_for(file_node)
        entry["stages"].add("semantic")
        entry["evidence"].add(hit.node)
        if entry["score"] is None or hit.score > entry["score"]:
            entry["score"] = hit.score

    t0 = time.perf_counter()
    if request.enable_traversal:
        additions = _expand_with_sources(graph, hits, request.traversal_config)
        for node_id, score in additions.items():
            node = graph.node(node_id)
            file_node = node if node.kind is NodeKind.FILE else containing_file(graph, node)
            if file_node is None:
                continue
            entry = entry_for(file_node)
            entry["stages"].add("traversal")
            entry["evidence"].add(node_id)
            if entry["score"] is None or score > entry["score"]:
                entry["score"] = score
    timings["traversal"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    discovered: set[str] = set()
    if request.enable_discovery:
        discovered = discover_mentioned_files(request.query_text, graph, providers.suggester)
        for file_id in discovered:
            entry = entry_for(graph.node(file_id))
            entry["stages"].add("discovery")
            entry["evidence"].add(file_id)
    timings["discovery"] = (time.perf_counter() - t0) * 1000.0

    neg_inf = float("-inf")
    discovery_group = sorted(
        (fid for fid in entries if "discovery" in entries[fid]["stages"]),
        key=lambda fid: entries[fid]["path"],
    )
    rest = sorted(
        (fid for fid in entries if "discovery" not in entries[fid]["stages"]),
        key=lambda fid: (
            -(entries[fid]["score"] if entries[fid]["score"] is not None else neg_inf),
            entries[fid]["path"],
        ),
    )
    ordered = (discovery_group + rest)[: request.k]
    results = [
        FileResult(
            path=entries[fid]["path"],
            file_id=fid,
            score=entries[fid]["score"],
            rank=rank + 1,
            provenance=sorted(entries[fid]["stages"]),
            evidence=sorted(entries[fid]["evidence"]),
        )
        for rank, fid in enumerate(ordered)
    ]
    return SearchResponse(
        results=results,
        diagnostics={"stage_warnings": list(bundle.warnings), "timings_ms": timings},
    )
