"""Graph enrichment: summaries and embeddings through pluggable providers."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import DimensionMismatchError, EnrichmentError, ProviderError
from ..graph import KnowledgeGraph
from ..model import Node, NodeKind, utc_now
from .cache import EnrichmentCache, cache_key
from .prompts import PROMPT_VERSION

log = logging.getLogger(__name__)

DESCRIBED_KINDS = (
    NodeKind.ROOT,
    NodeKind.FOLDER,
    NodeKind.FILE,
    NodeKind.CLASS,
    NodeKind.FUNCTION,
    NodeKind.MEMBER_FUNCTION,
)
CODE_EMBEDDED_KINDS = (NodeKind.FILE, NodeKind.CLASS, NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION)

SUMMARY_CONTENT_CAP = 4000
CODE_EMBED_CAP = 8000
EMBED_BATCH = 64


def provider_fingerprint(summarizer, embedder) -> str:
    return f"{summarizer.identity}|{embedder.identity}|prompts:{PROMPT_VERSION}"


def _summary_payload(node: Node) -> str:
    content = (node.raw_content or "")[:SUMMARY_CONTENT_CAP]
    return f"{node.kind.value}\n{node.name}\n{node.path}\n{node.docstring or ''}\n{content}"


def _needs_description(node: Node) -> bool:
    return node.description is None or node.description_embedding is None


def _needs_code_embedding(node: Node) -> bool:
    return (
        node.kind in CODE_EMBEDDED_KINDS
        and node.code_embedding is None
        and bool((node.raw_content or "").strip())
    )


def _is_stale(node: Node) -> bool:
    return _needs_description(node) or _needs_code_embedding(node)


def enrich_graph(
    graph: KnowledgeGraph,
    summarizer,
    embedder,
    scope: str = "stale-only",
    cache: EnrichmentCache | None = None,
    max_workers: int = 1,
) -> KnowledgeGraph:
    """Fill descriptions and embeddings for every in-scope node.

    ``scope="all"`` re-enriches everything; ``"stale-only"`` touches only nodes
    missing a description or embedding. The cache is consulted before any
    provider call. Per-node provider failures are recorded in
    ``graph.diagnostics["enrichment_failures"]`` and do not abort the run;
    a dimension mismatch is a hard error.
    """
    if scope not in ("all", "stale-only"):
        raise EnrichmentError(f"unknown scope {scope!r}")
    embed_dim = getattr(embedder, "dim", None)
    if graph.embedding_dim is None:
        if embed_dim is None:
            raise EnrichmentError("embedder does not declare a dimension and graph has none")
        graph.embedding_dim = int(embed_dim)
    elif embed_dim is not None and int(embed_dim) != graph.embedding_dim:
        raise DimensionMismatchError(
            f"embedder dim {embed_dim} != graph embedding_dim {graph.embedding_dim}"
        )
    cache = cache if cache is not None else EnrichmentCache()

    targets = [
        node
        for node in sorted(graph.nodes(), key=lambda n: (n.path, n.kind.value, n.qualified_name))
        if node.kind in DESCRIBED_KINDS and (scope == "all" or _is_stale(node))
    ]
    failures: dict[str, str] = {}

    # ---- descriptions (cache -> provider, optionally concurrent)
    described: dict[str, str] = {}
    to_summarize: list[tuple[Node, str]] = []
    for node in targets:
        if node.description is not None and scope == "stale-only":
            continue  # existing text stays; a missing embedding is refilled below
        key = cache_key(summarizer.identity, PROMPT_VERSION, _summary_payload(node))
        hit = cache.get_text(key)
        if hit is not None:
            described[node.id] = hit
        else:
            to_summarize.append((node, key))

    def _summarize(item):
        node, key = item
        content = (node.raw_content or "")[:SUMMARY_CONTENT_CAP]
        text = summarizer.summarize(
            node.kind.value, node.name, node.docstring, content, context=node.path or None
        )
        if not text or not text.strip():
            raise ProviderError("summarizer returned empty description")
        return node, key, text

    if max_workers > 1 and to_summarize:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = pool.map(_try, (lambda item=item: _summarize(item) for item in to_summarize))
            outcomes = list(results)
    else:
        outcomes = [_try(lambda item=item: _summarize(item)) for item in to_summarize]
    for outcome, item in zip(outcomes, to_summarize):
        node, key = item
        if isinstance(outcome, Exception):
            failures[node.id] = f"summarize: {outcome}"
            continue
        _, _, text = outcome
        cache.put_text(key, text)
        described[node.id] = text

    # ---- embeddings (batched through the cache)
    embed_requests: list[tuple[str, str, str, str]] = []  # node id, slot, key, text
    for node in targets:
        if node.id in failures:
            continue
        description = described.get(node.id, node.description)
        if description and (node.description_embedding is None or scope == "all"):
            key = cache_key(embedder.identity, PROMPT_VERSION, description)
            embed_requests.append((node.id, "description", key, description))
        if node.kind in CODE_EMBEDDED_KINDS and (node.code_embedding is None or scope == "all"):
            code = (node.raw_content or "")[:CODE_EMBED_CAP]
            if code.strip():
                key = cache_key(embedder.identity, PROMPT_VERSION, code)
                embed_requests.append((node.id, "code", key, code))

    vectors: dict[tuple[str, str], np.ndarray] = {}
    pending: list[tuple[str, str, str, str]] = []
    for request in embed_requests:
        node_id, slot, key, _ = request
        hit = cache.get_vector(key)
        if hit is not None:
            vectors[(node_id, slot)] = hit
        else:
            pending.append(request)
    for start in range(0, len(pending), EMBED_BATCH):
        batch = pending[start : start + EMBED_BATCH]
        try:
            embedded = embedder.embed([text for _, _, _, text in batch])
        except (ProviderError, ValueError) as exc:
            for node_id, slot, _, _ in batch:
                failures[node_id] = f"embed({slot}): {exc}"
            continue
        for (node_id, slot, key, _), vec in zip(batch, embedded):
            if graph.embedding_dim and vec.shape[0] != graph.embedding_dim:
                raise DimensionMismatchError(
                    f"provider returned dim {vec.shape[0]}, graph uses {graph.embedding_dim}"
                )
            cache.put_vector(key, vec)
            vectors[(node_id, slot)] = vec

    # ---- write back
    enriched = 0
    for node in targets:
        if node.id in failures:
            continue
        fields = {}
        text = described.get(node.id)
        if text is not None and text != node.description:
            fields["description"] = text
        desc_vec = vectors.get((node.id, "description"))
        if desc_vec is not None:
            fields["description_embedding"] = desc_vec
        code_vec = vectors.get((node.id, "code"))
        if code_vec is not None:
            fields["code_embedding"] = code_vec
        if fields:
            graph.update_node_fields(node.id, **fields)
            enriched += 1
    graph.provider_fingerprint = provider_fingerprint(summarizer, embedder)
    graph.diagnostics["enrichment_failures"] = {
        graph.node(nid).path or graph.node(nid).name: msg for nid, msg in sorted(failures.items())
    }
    graph.diagnostics["enriched_nodes"] = enriched
    return graph


def _try(fn):
    try:
        return fn()
    except (ProviderError, ValueError) as exc:
        return exc
