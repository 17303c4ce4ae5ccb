"""Typed property-graph schema: node/edge kinds, node records, statistics."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum

import numpy as np


class NodeKind(str, Enum):
    ROOT = "Root"
    FOLDER = "Folder"
    FILE = "File"
    CLASS = "Class"
    FUNCTION = "Function"
    MEMBER_FUNCTION = "MemberFunction"


class EdgeKind(str, Enum):
    CONTAINS = "Contains"
    IMPLEMENTS = "Implements"
    CALLS = "Calls"
    INHERITS = "Inherits"
    REFERS = "Refers"
    TESTS = "Tests"


ENTITY_KINDS = frozenset({NodeKind.CLASS, NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION})
FUNCTION_KINDS = frozenset({NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION})

# Allowed (source kind, destination kind) pairs per edge kind.
EDGE_ENDPOINT_RULES: dict[EdgeKind, frozenset[tuple[NodeKind, NodeKind]]] = {
    EdgeKind.CONTAINS: frozenset(
        [(s, d) for s in (NodeKind.ROOT, NodeKind.FOLDER) for d in (NodeKind.FOLDER, NodeKind.FILE)]
        + [(NodeKind.FILE, NodeKind.CLASS), (NodeKind.FILE, NodeKind.FUNCTION)]
    ),
    EdgeKind.IMPLEMENTS: frozenset(
        [(NodeKind.FILE, d) for d in ENTITY_KINDS] + [(NodeKind.CLASS, NodeKind.MEMBER_FUNCTION)]
    ),
    EdgeKind.CALLS: frozenset([(s, d) for s in FUNCTION_KINDS for d in FUNCTION_KINDS]),
    EdgeKind.INHERITS: frozenset([(NodeKind.CLASS, NodeKind.CLASS)]),
    EdgeKind.REFERS: frozenset([(NodeKind.FILE, NodeKind.FILE)]),
    EdgeKind.TESTS: frozenset(
        [
            (s, d)
            for s in (NodeKind.FILE, NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION)
            for d in (NodeKind.FILE, NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION)
        ]
    ),
}


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def format_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_ts(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%S.%fZ").replace(tzinfo=timezone.utc)


@dataclass(eq=False)
class Node:
    """A typed graph vertex.

    ``path`` is repository-relative ("" only for Root). Entity nodes (Class,
    Function, MemberFunction) keep the path of their defining file and carry a
    ``qualified_name`` such as ``InitCommand.handle``. ``parent_id`` points at
    the containing File (or Class for methods) and is part of the identity key.
    """

    id: str
    kind: NodeKind
    name: str
    path: str = ""
    qualified_name: str = ""
    parent_id: str | None = None
    language: str | None = None
    size_bytes: int | None = None
    signature: str | None = None
    docstring: str | None = None
    raw_content: str | None = None
    description: str | None = None
    description_embedding: np.ndarray | None = None
    code_embedding: np.ndarray | None = None
    last_modified: datetime = field(default_factory=utc_now)
    line_span: tuple[int, int] | None = None

    def __post_init__(self):
        if not self.qualified_name:
            self.qualified_name = self.name

    def identity_key(self) -> tuple:
        """Stable identity across content edits: (kind, path, qualified name, parent)."""
        return (self.kind.value, self.path, self.qualified_name, self.parent_id)

    def value_fields(self, include_timestamps: bool = True) -> dict:
        out = {
            "id": self.id,
            "kind": self.kind.value,
            "name": self.name,
            "path": self.path,
            "qualified_name": self.qualified_name,
            "parent_id": self.parent_id,
            "language": self.language,
            "size_bytes": self.size_bytes,
            "signature": self.signature,
            "docstring": self.docstring,
            "raw_content": self.raw_content,
            "description": self.description,
            "description_embedding": None
            if self.description_embedding is None
            else self.description_embedding.tobytes(),
            "code_embedding": None if self.code_embedding is None else self.code_embedding.tobytes(),
            "line_span": self.line_span,
        }
        if include_timestamps:
            out["last_modified"] = format_ts(self.last_modified)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Node):
            return NotImplemented
        return self.value_fields() == other.value_fields()

    def __hash__(self):
        return hash(self.id)

    def copy(self) -> "Node":
        node = replace(self)
        if node.description_embedding is not None:
            node.description_embedding = node.description_embedding.copy()
        if node.code_embedding is not None:
            node.code_embedding = node.code_embedding.copy()
        return node


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    kind: EdgeKind


# File-type buckets used by GraphStats (reproduces the three report buckets).
SOURCE_EXTENSIONS = {
    ".py": "python",
    ".pyi": "python",
    ".js": "javascript",
    ".jsx": "javascript",
    ".mjs": "javascript",
    ".ts": "typescript",
    ".tsx": "typescript",
    ".java": "java",
    ".kt": "kotlin",
    ".kts": "kotlin",
    ".go": "go",
    ".rs": "rust",
    ".c": "c",
    ".h": "c",
    ".cc": "cpp",
    ".cpp": "cpp",
    ".hpp": "cpp",
    ".cxx": "cpp",
    ".cs": "csharp",
    ".rb": "ruby",
    ".php": "php",
    ".swift": "swift",
    ".scala": "scala",
    ".sh": "shell",
    ".bash": "shell",
    ".zsh": "shell",
    ".pl": "perl",
    ".lua": "lua",
    ".sql": "sql",
    ".r": "r",
    ".m": "objc",
    ".vue": "vue",
}

DOCUMENTATION_EXTENSIONS = {".md", ".rst", ".txt", ".adoc", ".org", ".tex", ".markdown"}


def classify_file_type(path: str) -> str:
    """Bucket a file path as source / documentation / other by extension."""
    dot = path.rfind(".")
    ext = path[dot:].lower() if dot >= 0 else ""
    if ext in SOURCE_EXTENSIONS:
        return "source"
    if ext in DOCUMENTATION_EXTENSIONS:
        return "documentation"
    return "other"


def language_for_path(path: str) -> str | None:
    dot = path.rfind(".")
    ext = path[dot:].lower() if dot >= 0 else ""
    return SOURCE_EXTENSIONS.get(ext)


@dataclass
class GraphStats:
    nodes_by_kind: dict[str, int]
    edges_by_kind: dict[str, int]
    total_nodes: int
    total_edges: int
    file_types: dict[str, int]

    def as_dict(self) -> dict:
        return {
            "nodes_by_kind": dict(self.nodes_by_kind),
            "edges_by_kind": dict(self.edges_by_kind),
            "total_nodes": self.total_nodes,
            "total_edges": self.total_edges,
            "file_types": dict(self.file_types),
        }
