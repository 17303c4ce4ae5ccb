"""End-to-end build and update flows shared by the CLI and the HTTP service."""

from __future__ import annotations

import time

from .enrich import EnrichmentCache, enrich_graph
from .graph import KnowledgeGraph
from .ingest import RepoRef, build_skeleton, diff_revisions, link_tests, parse_repository, update_graph

def build_pipeline(
    repo_path: str,
    revision: str = "",
    summarizer=None,
    embedder=None,
    with_tests: bool = True,
    cache: EnrichmentCache | None = None,
) -> tuple[KnowledgeGraph, float]:
    """Skeleton -> parse -> test links -> enrichment. Returns (graph, seconds)."""
    started = time.perf_counter()
    graph = build_skeleton(RepoRef(repo_path, revision))
    parse_repository(graph)
    if with_tests:
        link_tests(graph)
    if summarizer is not None and embedder is not None:
        enrich_graph(graph, summarizer, embedder, scope="all", cache=cache)
    return graph, time.perf_counter() - started


def update_pipeline(
    graph: KnowledgeGraph,
    repo_path: str,
    new_revision: str,
    summarizer=None,
    embedder=None,
    cache: EnrichmentCache | None = None,
) -> tuple[KnowledgeGraph, float]:
    """Diff -> incremental update -> re-enrich stale nodes. Mutates ``graph``."""
    started = time.perf_counter()
    change = diff_revisions(repo_path, graph.revision, new_revision)
    update_graph(graph, change, repo_path)
    if summarizer is not None and embedder is not None:
        enrich_graph(graph, summarizer, embedder, scope="stale-only", cache=cache)
    return graph, time.perf_counter() - started
