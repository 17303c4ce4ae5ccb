"""Semantic search and the multi-stage search-relevant pipeline."""

from .pipeline import (
    DEFAULT_SEARCH_KINDS,
    FileResult,
    RankedHit,
    RetrievalRequest,
    SearchProviders,
    SearchResponse,
    TraversalConfig,
    containing_file,
    discover_mentioned_files,
    search_relevant,
    semantic_search,
    traverse_expand,
)
from .preprocess import CONCAT_SEPARATOR, PreprocessMode, QueryBundle, preprocess_query
from .similarity import cosine_similarity

__all__ = [
    "cosine_similarity",
    "PreprocessMode",
    "QueryBundle",
    "preprocess_query",
    "CONCAT_SEPARATOR",
    "RankedHit",
    "RetrievalRequest",
    "TraversalConfig",
    "SearchProviders",
    "SearchResponse",
    "FileResult",
    "semantic_search",
    "traverse_expand",
    "discover_mentioned_files",
    "search_relevant",
    "containing_file",
    "DEFAULT_SEARCH_KINDS",
]
