"""Query preprocessing ahead of semantic search.

Four modes: pass the raw text through, replace it with an LLM rewrite,
concatenate rewrite and raw into one text, or carry both texts and let the
search stage pick the better-scoring one per node. Provider failures degrade
to the raw query with a warning rather than failing the search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ProviderError

CONCAT_SEPARATOR = "\n---\n"


class PreprocessMode(str, Enum):
    NONE = "none"
    LLM = "llm"
    CONCAT_LLM = "concat-llm"
    SELECTIVE_LLM = "selective-llm"


@dataclass
class QueryBundle:
    raw_text: str
    mode: PreprocessMode
    preprocessed_text: str | None = None
    texts: list[tuple[str, str]] = field(default_factory=list)  # (label, text)
    embeddings: list[np.ndarray] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def preprocess_query(
    query: str,
    mode: PreprocessMode,
    preprocessor=None,
    embedder=None,
) -> QueryBundle:
    """Build the texts + embeddings the semantic stage will score against."""
    if not query or not query.strip():
        raise ValueError("query must be non-empty")
    bundle = QueryBundle(raw_text=query, mode=mode)
    rewritten: str | None = None
    if mode is not PreprocessMode.NONE:
        if preprocessor is None:
            bundle.warnings.append("no preprocessor configured; falling back to raw query")
        else:
            try:
                rewritten = preprocessor.preprocess(query)
            except ProviderError as exc:
                bundle.warnings.append(f"preprocessor failed ({exc}); falling back to raw query")
    if rewritten is None and mode is not PreprocessMode.NONE:
        bundle.texts = [("raw", query)]
    elif mode is PreprocessMode.NONE:
        bundle.texts = [("raw", query)]
    elif mode is PreprocessMode.LLM:
        bundle.preprocessed_text = rewritten
        bundle.texts = [("preprocessed", rewritten)]
    elif mode is PreprocessMode.CONCAT_LLM:
        bundle.preprocessed_text = rewritten
        bundle.texts = [("concat", f"{rewritten}{CONCAT_SEPARATOR}{query}")]
    else:  # SELECTIVE_LLM
        bundle.preprocessed_text = rewritten
        bundle.texts = [("preprocessed", rewritten), ("raw", query)]
    if embedder is not None:
        bundle.embeddings = embedder.embed([text for _, text in bundle.texts])
    return bundle
