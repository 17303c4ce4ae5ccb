"""Service configuration with environment overrides for provider endpoints."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from ..enrich import HttpEmbedder, HttpSummarizer, StubEmbedder, StubSummarizer
from ..retrieval import PreprocessMode, SearchProviders

ENV_SUMMARIZER_URL = "REPOKG_SUMMARIZER_URL"
ENV_EMBEDDER_URL = "REPOKG_EMBEDDER_URL"


@dataclass
class ServiceConfig:
    store_dir: Path = Path("graphs")
    summarizer_url: str | None = None
    embedder_url: str | None = None
    provider_timeout: float = 30.0
    provider_retries: int = 2
    default_mode: PreprocessMode = PreprocessMode.NONE
    default_k: int = 50  # conservative defaults: k=50, expansion depth 1
    default_depth: int = 1
    default_budget_fraction: float | None = None
    stub_dim: int = 256
    stub_seed: int = 0
    cluster_min_size: int = 3
    audit_log: Path | None = None

    def __post_init__(self):
        self.store_dir = Path(self.store_dir)
        self.summarizer_url = self.summarizer_url or os.environ.get(ENV_SUMMARIZER_URL)
        self.embedder_url = self.embedder_url or os.environ.get(ENV_EMBEDDER_URL)
        if self.audit_log is None:
            self.audit_log = self.store_dir / "audit.jsonl"

    def make_summarizer(self):
        if self.summarizer_url:
            return HttpSummarizer(
                self.summarizer_url, timeout=self.provider_timeout, retries=self.provider_retries
            )
        return StubSummarizer()

    def make_embedder(self):
        if self.embedder_url:
            return HttpEmbedder(
                self.embedder_url, timeout=self.provider_timeout, retries=self.provider_retries
            )
        return StubEmbedder(dim=self.stub_dim, seed=self.stub_seed)

    def make_preprocessor(self):
        if self.summarizer_url:
            return HttpSummarizer(
                self.summarizer_url, timeout=self.provider_timeout, retries=self.provider_retries
            )
        return None  # no offline preprocessor by default; NONE mode needs none

    def search_providers(self) -> SearchProviders:
        return SearchProviders(
            embedder=self.make_embedder(),
            preprocessor=self.make_preprocessor(),
            suggester=None,
        )
