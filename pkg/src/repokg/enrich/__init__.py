"""Summaries, embeddings, providers, and the content-addressed cache."""

from .cache import EnrichmentCache, cache_key
from .engine import enrich_graph, provider_fingerprint
from .prompts import PROMPT_VERSION, QUERY_TEMPLATE, SHARED_ANALYTICAL_INSTRUCTIONS, SUMMARIZE_TEMPLATE
from .providers import (
    CountingProvider,
    EmbedderProvider,
    HttpEmbedder,
    HttpSummarizer,
    QueryPreprocessor,
    StubEmbedder,
    StubQueryPreprocessor,
    StubSummarizer,
    SummarizerProvider,
)

__all__ = [
    "enrich_graph",
    "provider_fingerprint",
    "EnrichmentCache",
    "cache_key",
    "PROMPT_VERSION",
    "SHARED_ANALYTICAL_INSTRUCTIONS",
    "SUMMARIZE_TEMPLATE",
    "QUERY_TEMPLATE",
    "SummarizerProvider",
    "EmbedderProvider",
    "QueryPreprocessor",
    "StubSummarizer",
    "StubEmbedder",
    "StubQueryPreprocessor",
    "CountingProvider",
    "HttpSummarizer",
    "HttpEmbedder",
]
