"""Versioned JSON snapshot format for knowledge graphs.

Format version 1. Embeddings are written either as arrays of 32-bit floats or,
when the header carries ``"embedding_encoding": "b64le_f32"``, as base64 of
little-endian float32 bytes. Unknown top-level keys are ignored on load;
unknown node/edge kinds are a hard error.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import SnapshotError, SnapshotVersionError, SchemaError
from .graph import KnowledgeGraph
from .model import EdgeKind, Node, NodeKind, format_ts, parse_ts
from .vectors import decode_b64_f32, encode_b64_f32

FORMAT_VERSION = 1
B64_ENCODING = "b64le_f32"


def _encode_vec(vec: np.ndarray | None, b64: bool):
    if vec is None:
        return None
    if b64:
        return encode_b64_f32(vec)
    return [float(x) for x in vec]


def _decode_vec(value, b64: bool) -> np.ndarray | None:
    if value is None:
        return None
    if isinstance(value, str):
        return decode_b64_f32(value)
    if b64:
        raise SnapshotError("embedding_encoding is b64le_f32 but embedding is not a string")
    return np.asarray(value, dtype=np.float32)


def _node_record(node: Node, b64: bool) -> dict:
    return {
        "id": node.id,
        "kind": node.kind.value,
        "name": node.name,
        "path": node.path,
        "qualified_name": node.qualified_name,
        "parent": node.parent_id,
        "language": node.language,
        "size_bytes": node.size_bytes,
        "signature": node.signature,
        "docstring": node.docstring,
        "raw_content": node.raw_content,
        "description": node.description,
        "description_embedding": _encode_vec(node.description_embedding, b64),
        "code_embedding": _encode_vec(node.code_embedding, b64),
        "last_modified": format_ts(node.last_modified),
        "line_span": list(node.line_span) if node.line_span else None,
    }


def to_document(graph: KnowledgeGraph, embedding_encoding: str = B64_ENCODING) -> dict:
    b64 = embedding_encoding == B64_ENCODING
    doc = graph.header()
    if b64:
        doc["embedding_encoding"] = B64_ENCODING
    doc["nodes"] = [_node_record(n, b64) for n in graph.nodes()]
    doc["edges"] = [
        {"src": e.src, "dst": e.dst, "kind": e.kind.value} for e in sorted(
            graph.edges(), key=lambda e: (e.src, e.dst, e.kind.value)
        )
    ]
    # private extensions: ignored by other loaders per the format contract
    doc["next_node_id"] = graph._next_id
    doc["parse_records"] = graph.parse_records
    doc["diagnostics"] = graph.diagnostics
    return doc


def from_document(doc: dict) -> KnowledgeGraph:
    if not isinstance(doc, dict):
        raise SnapshotError("snapshot document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SnapshotVersionError(version)
    b64 = doc.get("embedding_encoding") == B64_ENCODING
    graph = KnowledgeGraph(
        graph_id=doc.get("graph_id", ""),
        repo_url=doc.get("repo_url", ""),
        revision=doc.get("revision", ""),
        embedding_dim=doc.get("embedding_dim"),
        provider_fingerprint=doc.get("provider_fingerprint", ""),
    )
    pending = list(doc.get("nodes", []))
    inserted = True
    while pending and inserted:
        inserted = False
        deferred = []
        for rec in pending:
            parent = rec.get("parent")
            if parent is not None and parent not in graph:
                deferred.append(rec)
                continue
            graph.upsert_node(_record_to_node(rec, b64))
            inserted = True
        pending = deferred
    if pending:
        raise SnapshotError(
            f"{len(pending)} node records have dangling parent ids (first: {pending[0].get('id')})"
        )
    for rec in doc.get("edges", []):
        try:
            kind = EdgeKind(rec["kind"])
        except ValueError:
            raise SnapshotError(f"unknown edge kind: {rec.get('kind')!r}") from None
        except (KeyError, TypeError):
            raise SnapshotError(f"malformed edge record: {rec!r}") from None
        graph.add_edge(rec["src"], rec["dst"], kind)
    graph.parse_records = doc.get("parse_records", {}) or {}
    graph.diagnostics = doc.get("diagnostics", {}) or {}
    max_numeric = 0
    for nid in graph.node_ids():
        if nid.startswith("n") and nid[1:].isdigit():
            max_numeric = max(max_numeric, int(nid[1:]))
    graph._next_id = max(doc.get("next_node_id", 0) or 0, max_numeric + 1)
    try:
        graph.created_at = parse_ts(doc["created_at"])
        graph.updated_at = parse_ts(doc["updated_at"])
    except (KeyError, ValueError) as exc:
        raise SnapshotError(f"bad snapshot timestamps: {exc}") from None
    return graph


def _record_to_node(rec: dict, b64: bool) -> Node:
    try:
        kind = NodeKind(rec["kind"])
    except ValueError:
        raise SnapshotError(f"unknown node kind: {rec.get('kind')!r}") from None
    except (KeyError, TypeError):
        raise SnapshotError(f"malformed node record: {rec!r}") from None
    span = rec.get("line_span")
    try:
        if not rec.get("last_modified"):
            raise SnapshotError(f"node record {rec.get('id')!r} lacks last_modified")
        return Node(
            id=rec.get("id", ""),
            kind=kind,
            name=rec.get("name", ""),
            path=rec.get("path", ""),
            qualified_name=rec.get("qualified_name", "") or rec.get("name", ""),
            parent_id=rec.get("parent"),
            language=rec.get("language"),
            size_bytes=rec.get("size_bytes"),
            signature=rec.get("signature"),
            docstring=rec.get("docstring"),
            raw_content=rec.get("raw_content"),
            description=rec.get("description"),
            description_embedding=_decode_vec(rec.get("description_embedding"), b64),
            code_embedding=_decode_vec(rec.get("code_embedding"), b64),
            last_modified=parse_ts(rec["last_modified"]),
            line_span=(span[0], span[1]) if span else None,
        )
    except (SchemaError, SnapshotError):
        raise
    except (TypeError, ValueError, IndexError) as exc:
        raise SnapshotError(f"malformed node record {rec.get('id')!r}: {exc}") from None


def save_snapshot(
    graph: KnowledgeGraph, destination: str | Path, embedding_encoding: str = B64_ENCODING
) -> None:
    """Write the graph atomically; ``load_snapshot`` restores it bit-exactly."""
    path = Path(destination)
    doc = to_document(graph, embedding_encoding)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")
    os.replace(tmp, path)


def load_snapshot(source: str | Path) -> KnowledgeGraph:
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotError(
            f"snapshot {path} is corrupt at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    return from_document(doc)
