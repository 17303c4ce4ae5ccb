"""HTTP service exposing build/update/search/cluster/query endpoints.

Mutation endpoints touch only graph storage, never the analyzed repository;
search, node, subgraph, cluster, and stats endpoints are strictly read-only.
Every non-health request is appended to the audit log. Long-running builds
return a job id pollable at ``GET /jobs/{id}``.
"""

from __future__ import annotations

import copy
import time

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..cluster import (
    SemanticClusterParams,
    file_graph_view,
    label_clusters,
    label_propagation,
    louvain,
    misc_group,
    semantic_cluster_graph,
)
from ..errors import (
    EnrichmentError,
    IngestError,
    ProviderError,
    QueryValidationError,
    RevisionMismatchError,
    UnknownNodeError,
)
from ..model import EdgeKind
from ..query import read_query
from ..retrieval import PreprocessMode, RetrievalRequest, search_relevant
from ..workflows import build_pipeline, update_pipeline
from .audit import AuditLog
from .config import ServiceConfig
from .registry import GraphRegistry, JobRunner


class BuildRequest(BaseModel):
    repo_path: str
    revision: str = ""
    enrich: bool = True
    link_tests: bool = True


class UpdateRequest(BaseModel):
    repo_path: str
    old_revision: str
    new_revision: str


class SearchBody(BaseModel):
    query: str = Field(min_length=1)
    mode: str | None = None
    k: int | None = Field(default=None, ge=1)
    budget_fraction: float | None = Field(default=None, gt=0.0, le=1.0)
    enable_discovery: bool = True
    enable_traversal: bool = True


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="repokg service")
    registry = GraphRegistry(config.store_dir)
    jobs = JobRunner()
    audit = AuditLog(config.audit_log)
    app.state.config = config
    app.state.registry = registry
    app.state.jobs = jobs
    app.state.audit = audit
    app.state.search_providers = config.search_providers()

    @app.middleware("http")
    async def audit_middleware(request: Request, call_next):
        if request.url.path == "/healthz":
            return await call_next(request)
        body = await request.body()
        started = time.perf_counter()
        response = await call_next(request)
        graph_id = request.path_params.get("graph_id") if request.path_params else None
        if graph_id is None:
            parts = request.url.path.split("/")
            if len(parts) > 2 and parts[1] == "graphs":
                graph_id = parts[2]
        audit.record(
            endpoint=f"{request.method} {request.url.path}",
            body=body,
            graph_id=graph_id,
            duration_ms=(time.perf_counter() - started) * 1000.0,
            outcome=str(response.status_code),
        )
        return response

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request, exc):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(QueryValidationError)
    async def query_validation_handler(request, exc):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(RevisionMismatchError)
    async def revision_handler(request, exc):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.exception_handler(ProviderError)
    async def provider_handler(request, exc):
        return JSONResponse(status_code=503, content={"error": str(exc)})

    def get_graph(graph_id: str):
        try:
            return registry.get(graph_id)
        except KeyError:
            return None

    def not_found(what: str):
        return JSONResponse(status_code=404, content={"error": f"unknown {what}"})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "graphs_loaded": len(registry.ids())}

    @app.get("/graphs")
    def list_graphs():
        return {"graphs": registry.ids()}

    @app.post("/graphs", status_code=202)
    def build_graph(body: BuildRequest):
        def run() -> str:
            summarizer = config.make_summarizer() if body.enrich else None
            embedder = config.make_embedder() if body.enrich else None
            graph, _ = build_pipeline(
                body.repo_path,
                body.revision,
                summarizer,
                embedder,
                with_tests=body.link_tests,
            )
            registry.put(graph)
            return graph.graph_id

        job = jobs.submit("build", run)
        return {"job_id": job.id, "status": job.status}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        try:
            return jobs.get(job_id).as_dict()
        except KeyError:
            return not_found("job")

    @app.post("/graphs/{graph_id}/update")
    def update(graph_id: str, body: UpdateRequest):
        graph = get_graph(graph_id)
        if graph is None:
            return not_found("graph")
        if graph.revision != body.old_revision:
            return JSONResponse(
                status_code=409,
                content={
                    "error": "revision mismatch",
                    "graph_revision": graph.revision,
                    "requested_old_revision": body.old_revision,
                },
            )
        with registry.write_lock(graph_id):
            working = copy.deepcopy(graph)
            try:
                update_pipeline(
                    working,
                    body.repo_path,
                    body.new_revision,
                    config.make_summarizer(),
                    config.make_embedder(),
                )
            except IngestError as exc:
                return JSONResponse(status_code=400, content={"error": str(exc)})
            registry.put(working)
        return {"graph_id": graph_id, "revision": working.revision,
                "stats": working.stats().as_dict()}

    @app.post("/graphs/{graph_id}/search")
    def search(graph_id: str, body: SearchBody):
        graph = get_graph(graph_id)
        if graph is None:
            return not_found("graph")
        mode = PreprocessMode(body.mode) if body.mode else config.default_mode
        request = RetrievalRequest(
            query_text=body.query,
            mode=mode,
            k=body.k or config.default_k,
            budget_fraction=body.budget_fraction or config.default_budget_fraction,
            enable_discovery=body.enable_discovery,
            enable_traversal=body.enable_traversal,
        )
        try:
            response = search_relevant(graph, request, app.state.search_providers)
        except EnrichmentError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return response.to_json()

    @app.get("/graphs/{graph_id}/stats")
    def stats(graph_id: str):
        graph = get_graph(graph_id)
        if graph is None:
            return not_found("graph")
        return read_query(graph, {"op": "stats"})

    @app.get("/graphs/{graph_id}/nodes")
    def node_by_path(graph_id: str, path: str):
        graph = get_graph(graph_id)
        if graph is None:
            return not_found("graph")
        result = read_query(graph, {"op": "node_by_path", "path": path})
        if result["node"] is None:
            return not_found("node")
        node = graph.node_by_path(path)
        neighbors = {
            kind.value: sorted(
                {dst for dst, _ in graph.out_edges(node.id, kind)}
                | {src for src, _ in graph.in_edges(node.id, kind)}
            )
            for kind in EdgeKind
        }
        result["node"]["neighbors"] = {k: v for k, v in neighbors.items() if v}
        result["node"]["snippet"] = (node.raw_content or "")[:1200] or None
        return result

    @app.get("/graphs/{graph_id}/subgraph")
    def subgraph(graph_id: str, files: str, depth: int = 1):
        graph = get_graph(graph_id)
        if graph is None:
            return not_found("graph")
        seeds = set()
        missing = []
        for raw in files.split(","):
            node = graph.node_by_path(raw.strip())
            if node is None:
                missing.append(raw.strip())
            else:
                seeds.add(node.id)
        if missing or not seeds:
            return JSONResponse(
                status_code=404, content={"error": f"unknown files: {missing or files}"}
            )
        nodes = set(seeds)
        if depth > 0:
            nodes |= graph.neighbors(seeds, None, "both", depth)
        result = read_query(graph, {"op": "subgraph", "nodes": sorted(nodes)})
        result["seeds"] = sorted(seeds)
        return result

    @app.get("/graphs/{graph_id}/clusters")
    def clusters(graph_id: str, method: str = "louvain", seed: int = 0,
                 min_size: int | None = None):
        graph = get_graph(graph_id)
        if graph is None:
            return not_found("graph")
        min_size = config.cluster_min_size if min_size is None else min_size
        if method == "louvain":
            assignment = louvain(file_graph_view(graph))
        elif method in ("labelprop", "label-propagation"):
            assignment = label_propagation(file_graph_view(graph), seed=seed)
        elif method == "semantic":
            try:
                assignment = semantic_cluster_graph(
                    graph, SemanticClusterParams(seed=seed)
                )
            except ValueError as exc:
                return JSONResponse(status_code=400, content={"error": str(exc)})
        else:
            return JSONResponse(
                status_code=400,
                content={"error": f"unknown method {method!r}; use louvain|labelprop|semantic"},
            )
        assignment = label_clusters(misc_group(assignment, min_size), graph)
        return assignment.to_json()

    return app
