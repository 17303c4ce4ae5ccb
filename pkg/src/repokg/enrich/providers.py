"""Summarization / embedding providers: protocols, offline stubs, HTTP clients.

Stub providers are bit-deterministic across processes and platforms so test
suites and incremental-equivalence checks can run without any model hosting.
The HTTP providers speak the wire protocol::

    POST /v1/summarize {kind,name,docstring,content,context} -> {description}
    POST /v1/embed {texts:[...]} -> {vectors:[[...]], dim:N}
"""

from __future__ import annotations

import hashlib
import re
import time
from typing import Protocol, Sequence

import httpx
import numpy as np

from ..errors import ProviderError
from ..vectors import as_unit_f32

_SENTENCE_END = re.compile(r"(?<=[.!?])\s")
_TOKEN = re.compile(r"[A-Za-z0-9_]+")


class SummarizerProvider(Protocol):
    identity: str

    def summarize(self, kind: str, name: str, docstring: str | None, content: str | None,
                  context: str | None = None) -> str: ...


class EmbedderProvider(Protocol):
    identity: str
    dim: int

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


class QueryPreprocessor(Protocol):
    identity: str

    def preprocess(self, query: str) -> str: ...


def first_sentence(text: str) -> str:
    stripped = text.strip()
    if not stripped:
        return stripped
    return _SENTENCE_END.split(stripped.splitlines()[0].strip() or stripped, 1)[0].strip() or stripped


class StubSummarizer:
    """Deterministic offline summarizer: first docstring sentence, else a
    "kind name at path" template."""

    identity = "stub-summarizer/1"

    def summarize(self, kind, name, docstring, content, context=None) -> str:
        if docstring and docstring.strip():
            return first_sentence(docstring)
        if not name:
            return f"{kind} (unnamed)"
        if context:
            return f"{kind} {name} at {context}"
        return f"{kind} {name}"


class StubEmbedder:
    """Seeded bag-of-hashed-tokens embedding.

    Each lowercase token is hashed (sha256, salted by the seed) onto one of
    ``dim`` buckets with weight = count; the vector is L2-normalized. Texts
    with overlapping tokens therefore score strictly higher cosine than
    token-disjoint texts (which score 0 barring bucket collisions).
    """

    def __init__(self, dim: int = 256, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self.identity = f"stub-embedder/d{dim}-s{seed}"
        self._bucket_cache: dict[str, int] = {}

    def _bucket(self, token: str) -> int:
        hit = self._bucket_cache.get(token)
        if hit is None:
            digest = hashlib.sha256(f"{self.seed}:{token}".encode()).digest()
            hit = int.from_bytes(digest[:8], "big") % self.dim
            self._bucket_cache[token] = hit
        return hit

    def embed_one(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise ValueError("cannot embed empty text")
        counts = np.zeros(self.dim, dtype=np.float64)
        for token in _TOKEN.findall(text.lower()):
            counts[self._bucket(token)] += 1.0
        if not counts.any():
            raise ValueError(f"text has no embeddable tokens: {text!r}")
        return as_unit_f32(counts, self.dim)

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed_one(t) for t in texts]


class StubQueryPreprocessor:
    """Echo preprocessor used to keep retrieval tests deterministic."""

    identity = "stub-preprocessor/1"

    def preprocess(self, query: str) -> str:
        return f"NORMALIZED:{query}"


class CountingProvider:
    """Wraps a provider and counts outbound calls (used by cache tests)."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0
        self.identity = inner.identity
        self.dim = getattr(inner, "dim", None)

    def summarize(self, *args, **kwargs):
        self.calls += 1
        return self.inner.summarize(*args, **kwargs)

    def embed(self, texts):
        self.calls += len(texts)
        return self.inner.embed(texts)

    def preprocess(self, query):
        self.calls += 1
        return self.inner.preprocess(query)


class _HttpBase:
    def __init__(self, base_url: str, timeout: float = 30.0, retries: int = 2):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self._client = httpx.Client(timeout=timeout)

    def _post(self, route: str, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(f"{self.base_url}{route}", json=payload)
                response.raise_for_status()
                return response.json()
            except (httpx.HTTPError, ValueError) as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(min(0.2 * (attempt + 1), 1.0))
        raise ProviderError(f"provider call {route} failed after {self.retries + 1} attempts: {last_error}")


class HttpSummarizer(_HttpBase):
    def __init__(self, base_url: str, identity: str = "", **kwargs):
        super().__init__(base_url, **kwargs)
        self.identity = identity or f"http-summarizer@{self.base_url}"

    def summarize(self, kind, name, docstring, content, context=None) -> str:
        data = self._post(
            "/v1/summarize",
            {"kind": kind, "name": name, "docstring": docstring, "content": content,
             "context": context},
        )
        description = data.get("description", "")
        if not description:
            raise ProviderError("summarize provider returned an empty description")
        return description

    def preprocess(self, query: str) -> str:
        # query preprocessing rides the summarize route with kind="query"
        return self.summarize("query", "user-query", None, query)


class HttpEmbedder(_HttpBase):
    def __init__(self, base_url: str, dim: int | None = None, identity: str = "", **kwargs):
        super().__init__(base_url, **kwargs)
        self.identity = identity or f"http-embedder@{self.base_url}"
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        data = self._post("/v1/embed", {"texts": list(texts)})
        vectors = data.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderError("embed provider response is not length-preserving")
        dim = data.get("dim") or (len(vectors[0]) if vectors else self.dim)
        if self.dim is None:
            self.dim = dim
        return [as_unit_f32(v, self.dim) for v in vectors]
