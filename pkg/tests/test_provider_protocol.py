"""Out-of-process provider wire protocol over real HTTP.

A uvicorn server in a background thread serves /v1/summarize and /v1/embed
backed by the stub providers; the HTTP provider clients must behave
identically to using the stubs directly, and surface failures after retries.
"""

from __future__ import annotations

import socket
import threading
import time

import numpy as np
import pytest
import uvicorn
from fastapi import FastAPI
from pydantic import BaseModel

from repokg.enrich import HttpEmbedder, HttpSummarizer, StubEmbedder, StubSummarizer
from repokg.errors import ProviderError


class SummarizeBody(BaseModel):
    kind: str
    name: str
    docstring: str | None = None
    content: str | None = None
    context: str | None = None


class EmbedBody(BaseModel):
    texts: list[str]


def provider_app() -> FastAPI:
    app = FastAPI()
    summarizer = StubSummarizer()
    embedder = StubEmbedder(dim=48, seed=0)

    @app.post("/v1/summarize")
    def summarize(body: SummarizeBody):
        return {
            "description": summarizer.summarize(
                body.kind, body.name, body.docstring, body.content, context=body.context
            )
        }

    @app.post("/v1/embed")
    def embed(body: EmbedBody):
        vectors = embedder.embed(body.texts)
        return {"vectors": [v.tolist() for v in vectors], "dim": embedder.dim}

    return app


@pytest.fixture(scope="module")
def provider_url():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    server = uvicorn.Server(
        uvicorn.Config(provider_app(), host="127.0.0.1", port=port, log_level="error")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started and time.time() < deadline:
        time.sleep(0.02)
    assert server.started
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


class TestWireProtocol:
    def test_summarize_matches_local_stub(self, provider_url):
        remote = HttpSummarizer(provider_url)
        local = StubSummarizer()
        args = ("Function", "connect", "Open a connection. Slowly.", "def connect(): ...")
        assert remote.summarize(*args) == local.summarize(*args)

    def test_embed_matches_local_stub(self, provider_url):
        remote = HttpEmbedder(provider_url)
        local = StubEmbedder(dim=48, seed=0)
        texts = ["open a database connection", "render the canvas"]
        got = remote.embed(texts)
        want = local.embed(texts)
        assert remote.dim == 48
        for g, w in zip(got, want):
            assert np.allclose(g, w, atol=1e-6)

    def test_preprocess_rides_summarize_route(self, provider_url):
        remote = HttpSummarizer(provider_url)
        out = remote.preprocess("fix the crash")
        assert out  # stub template for kind="query"

    def test_unreachable_provider_raises_after_retries(self):
        dead = HttpEmbedder("http://127.0.0.1:9", timeout=0.2, retries=1)
        with pytest.raises(ProviderError, match="attempts"):
            dead.embed(["text"])
