"""Closed read-only query surface over a knowledge graph.

Requests are plain dicts with an ``op`` field drawn from a fixed set; anything
else is rejected with a validation error that lists the allowed forms. Queries
never mutate the graph and every result carries provenance (node ids, paths).
"""

from __future__ import annotations

from .errors import QueryValidationError, UnknownNodeError
from .graph import KnowledgeGraph
from .model import EdgeKind, Node, NodeKind

ALLOWED_FORMS = {
    "node_by_path": {"path": "repository-relative path"},
    "nodes_by_kind": {"kind": "one of Root|Folder|File|Class|Function|MemberFunction"},
    "neighbors": {
        "seeds": "list of node ids",
        "edge_kinds": "optional list of edge kinds",
        "direction": "outgoing|incoming|both (default outgoing)",
        "depth": "positive integer (default 1)",
        "node_kinds": "optional list of node kinds to keep",
    },
    "subgraph": {"nodes": "list of node ids"},
    "stats": {},
}


def node_payload(node: Node) -> dict:
    out = {
        "id": node.id,
        "kind": node.kind.value,
        "name": node.name,
        "qualified_name": node.qualified_name,
        "path": node.path,
        "language": node.language,
        "size_bytes": node.size_bytes,
        "signature": node.signature,
        "docstring": node.docstring,
        "description": node.description,
        "line_span": list(node.line_span) if node.line_span else None,
    }
    if node.description is not None:
        out["description_source"] = "llm-suggested"
    return out


def _reject(message: str) -> QueryValidationError:
    forms = "; ".join(
        f"{op}({', '.join(args) if args else ''})" for op, args in ALLOWED_FORMS.items()
    )
    return QueryValidationError(f"{message}; allowed request forms: {forms}")


def _parse_kind(value, enum, label: str):
    try:
        return enum(value)
    except ValueError:
        raise _reject(f"unknown {label}: {value!r}") from None


def read_query(graph: KnowledgeGraph, request: dict) -> dict:
    """Execute one request from the closed query set; never mutates the graph."""
    if not isinstance(request, dict):
        raise _reject("request must be an object")
    op = request.get("op")
    if op == "node_by_path":
        path = request.get("path")
        if not isinstance(path, str):
            raise _reject("node_by_path requires a string 'path'")
        node = graph.node_by_path(path)
        return {
            "op": op,
            "path": path,
            "node": node_payload(node) if node else None,
        }
    if op == "nodes_by_kind":
        kind = _parse_kind(request.get("kind"), NodeKind, "node kind")
        nodes = sorted(graph.nodes_by_kind(kind), key=lambda n: (n.path, n.id))
        return {"op": op, "kind": kind.value, "nodes": [node_payload(n) for n in nodes]}
    if op == "neighbors":
        seeds = request.get("seeds")
        if not isinstance(seeds, (list, tuple)) or not seeds:
            raise _reject("neighbors requires a non-empty 'seeds' list")
        depth = request.get("depth", 1)
        if not isinstance(depth, int) or depth < 1:
            raise _reject("neighbors 'depth' must be a positive integer")
        direction = request.get("direction", "outgoing")
        if direction not in ("outgoing", "incoming", "both"):
            raise _reject("neighbors 'direction' must be outgoing|incoming|both")
        edge_kinds = request.get("edge_kinds")
        kinds = (
            None
            if edge_kinds is None
            else {_parse_kind(k, EdgeKind, "edge kind") for k in edge_kinds}
        )
        node_kinds = request.get("node_kinds")
        allowed = (
            None
            if node_kinds is None
            else {_parse_kind(k, NodeKind, "node kind") for k in node_kinds}
        )
        found = graph.neighbors(set(seeds), kinds, direction, depth, allowed)
        nodes = sorted((graph.node(nid) for nid in found), key=lambda n: (n.path, n.id))
        return {"op": op, "seeds": list(seeds), "nodes": [node_payload(n) for n in nodes]}
    if op == "subgraph":
        ids = request.get("nodes")
        if not isinstance(ids, (list, tuple)) or not ids:
            raise _reject("subgraph requires a non-empty 'nodes' list")
        nodes, edges = graph.subgraph(set(ids))
        return {
            "op": op,
            "nodes": [node_payload(n) for n in nodes],
            "edges": [{"src": e.src, "dst": e.dst, "kind": e.kind.value} for e in edges],
        }
    if op == "stats":
        return {"op": op, "stats": graph.stats().as_dict()}
    raise _reject(f"unknown op: {op!r}")
