"""Versioned typed property-graph container with traversal and statistics.

Writes are serialized through an internal lock (single-writer contract);
reads may run concurrently. Traversal is backed by a cached CSR index and the
kernel backend selected in :mod:`repokg._kernels`.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import Counter

import numpy as np

from . import _kernels
from .errors import SchemaError, UnknownNodeError, DimensionMismatchError
from .model import (
    EDGE_ENDPOINT_RULES,
    ENTITY_KINDS,
    Edge,
    GraphStats,
    Node,
    NodeKind,
    EdgeKind,
    classify_file_type,
    format_ts,
    utc_now,
)

EDGE_KIND_ORDER = list(EdgeKind)
EDGE_KIND_BIT = {kind: i for i, kind in enumerate(EDGE_KIND_ORDER)}

DIRECTIONS = ("outgoing", "incoming", "both")


class _CsrIndex:
    """Immutable CSR adjacency over a frozen view of the graph."""

    def __init__(self, nodes: list[str], edges: list[Edge]):
        self.ids = nodes
        self.index_of = {nid: i for i, nid in enumerate(nodes)}
        n = len(nodes)
        out_adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        in_adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for edge in edges:
            s = self.index_of[edge.src]
            d = self.index_of[edge.dst]
            bit = EDGE_KIND_BIT[edge.kind]
            out_adj[s].append((d, bit))
            in_adj[d].append((s, bit))
        self.out_indptr, self.out_indices, self.out_kinds = self._pack(out_adj)
        self.in_indptr, self.in_indices, self.in_kinds = self._pack(in_adj)

    @staticmethod
    def _pack(adj: list[list[tuple[int, int]]]):
        indptr = np.zeros(len(adj) + 1, dtype=np.int64)
        total = sum(len(row) for row in adj)
        indices = np.empty(total, dtype=np.int64)
        kinds = np.empty(total, dtype=np.int8)
        pos = 0
        for i, row in enumerate(adj):
            for dst, bit in row:
                indices[pos] = dst
                kinds[pos] = bit
                pos += 1
            indptr[i + 1] = pos
        return indptr, indices, kinds


class KnowledgeGraph:
    """Nodes + edges pinned to a repository revision, with path and vector indexes."""

    def __init__(
        self,
        graph_id: str = "",
        repo_url: str = "",
        revision: str = "",
        embedding_dim: int | None = None,
        provider_fingerprint: str = "",
    ):
        self.graph_id = graph_id or "g-unnamed"
        self.repo_url = repo_url
        self.revision = revision
        self.embedding_dim = embedding_dim
        self.provider_fingerprint = provider_fingerprint
        self.created_at = utc_now()
        self.updated_at = self.created_at
        self._nodes: dict[str, Node] = {}
        self._out: dict[str, set[tuple[str, EdgeKind]]] = {}
        self._in: dict[str, set[tuple[str, EdgeKind]]] = {}
        self._edge_counts: Counter = Counter()
        self._identity_to_id: dict[tuple, str] = {}
        self._path_index: dict[tuple[str, NodeKind], str] = {}
        self._root_id: str | None = None
        self._next_id = 1
        self._lock = threading.RLock()
        self._csr: _CsrIndex | None = None
        # ingestion side-tables: per-file parse records and last diagnostics
        self.parse_records: dict[str, dict] = {}
        self.diagnostics: dict = {}

    # ------------------------------------------------------------------ nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def nodes(self) -> list[Node]:
        return list(self._nodes.values())

    def node_ids(self) -> list[str]:
        return list(self._nodes.keys())

    @property
    def root_id(self) -> str | None:
        return self._root_id

    def node_by_identity(self, key: tuple) -> Node | None:
        nid = self._identity_to_id.get(key)
        return self._nodes.get(nid) if nid else None

    def node_by_path(self, path: str) -> Node | None:
        """The File node at ``path``, or the Folder node if no File matches."""
        for kind in (NodeKind.FILE, NodeKind.FOLDER):
            nid = self._path_index.get((path, kind))
            if nid is not None:
                return self._nodes[nid]
        return None

    def nodes_by_kind(self, kind: NodeKind) -> list[Node]:
        return [n for n in self._nodes.values() if n.kind is kind]

    def nodes_by_file(self, path: str) -> list[Node]:
        """Entity nodes defined in the file at ``path``."""
        return [n for n in self._nodes.values() if n.path == path and n.kind in ENTITY_KINDS]

    def _alloc_id(self) -> str:
        nid = f"n{self._next_id:06d}"
        self._next_id += 1
        return nid

    def _validate_node(self, node: Node) -> None:
        if node.kind is NodeKind.ROOT:
            if node.path:
                raise SchemaError("Root path must be empty")
            if self._root_id is not None and self._identity_to_id.get(node.identity_key()) != self._root_id:
                raise SchemaError("graph already has a Root node")
        elif not node.path:
            raise SchemaError(f"{node.kind.value} node requires a non-empty path: {node.name!r}")
        if node.kind is NodeKind.FILE:
            if node.language is None or node.size_bytes is None:
                raise SchemaError(f"File node {node.path!r} requires language and size_bytes")
            if node.size_bytes < 0:
                raise SchemaError("size_bytes must be non-negative")
        else:
            if node.language is not None or node.size_bytes is not None:
                raise SchemaError(f"{node.kind.value} node {node.name!r} cannot carry language/size_bytes")
        if node.signature is not None and node.kind not in (NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION):
            raise SchemaError(f"{node.kind.value} node {node.name!r} cannot carry a signature")
        if node.line_span is not None:
            start, end = node.line_span
            if start < 1 or start > end:
                raise SchemaError(f"invalid line_span {node.line_span} on {node.name!r}")
        if node.parent_id is not None and node.parent_id not in self._nodes:
            raise SchemaError(f"parent id {node.parent_id} does not exist")
        for vec in (node.description_embedding, node.code_embedding):
            if vec is None:
                continue
            if self.embedding_dim is not None and vec.shape[0] != self.embedding_dim:
                raise DimensionMismatchError(
                    f"embedding dim {vec.shape[0]} != graph dim {self.embedding_dim}"
                )

    def upsert_node(self, node: Node) -> str:
        """Insert or replace by identity key; returns the stable node id.

        On replacement all mutable fields are taken from ``node`` and the
        existing id is preserved. Schema violations reject the operation with
        the graph unchanged.
        """
        with self._lock:
            self._validate_node(node)
            key = node.identity_key()
            existing_id = self._identity_to_id.get(key)
            if existing_id is None:
                node.id = node.id if node.id and node.id not in self._nodes else self._alloc_id()
                self._nodes[node.id] = node
                self._identity_to_id[key] = node.id
                self._out.setdefault(node.id, set())
                self._in.setdefault(node.id, set())
                if node.kind is NodeKind.ROOT:
                    self._root_id = node.id
            else:
                node.id = existing_id
                self._nodes[existing_id] = node
            if node.kind in (NodeKind.FILE, NodeKind.FOLDER):
                self._path_index[(node.path, node.kind)] = node.id
            self._touch()
            return node.id

    def update_node_fields(self, node_id: str, **fields) -> Node:
        """Replace mutable fields on an existing node (identity fields rejected)."""
        with self._lock:
            node = self.node(node_id)
            for name in ("id", "kind", "path", "qualified_name", "parent_id"):
                if name in fields:
                    raise SchemaError(f"field {name} is part of the node identity")
            updated = node.copy()
            for name, value in fields.items():
                setattr(updated, name, value)
            self._validate_node(updated)
            self._nodes[node_id] = updated
            self._touch()
            return updated

    def remove_node(self, node_id: str) -> None:
        """Remove a node and all incident edges. Ids are never reused."""
        with self._lock:
            node = self.node(node_id)
            for dst, kind in list(self._out.get(node_id, ())):
                self._in[dst].discard((node_id, kind))
                self._edge_counts[kind] -= 1
            for src, kind in list(self._in.get(node_id, ())):
                self._out[src].discard((node_id, kind))
                self._edge_counts[kind] -= 1
            self._out.pop(node_id, None)
            self._in.pop(node_id, None)
            del self._nodes[node_id]
            self._identity_to_id.pop(node.identity_key(), None)
            if node.kind in (NodeKind.FILE, NodeKind.FOLDER):
                self._path_index.pop((node.path, node.kind), None)
            if self._root_id == node_id:
                self._root_id = None
            self._touch()

    # ------------------------------------------------------------------ edges

    def add_edge(self, src: str, dst: str, kind: EdgeKind) -> None:
        """Add a typed edge; duplicates collapse silently to one."""
        with self._lock:
            if src not in self._nodes:
                raise UnknownNodeError(src)
            if dst not in self._nodes:
                raise UnknownNodeError(dst)
            pair = (self._nodes[src].kind, self._nodes[dst].kind)
            if pair not in EDGE_ENDPOINT_RULES[kind]:
                raise SchemaError(
                    f"{kind.value} edge not allowed from {pair[0].value} to {pair[1].value}"
                )
            entry = (dst, kind)
            if entry in self._out[src]:
                return
            self._out[src].add(entry)
            self._in[dst].add((src, kind))
            self._edge_counts[kind] += 1
            self._touch()

    def remove_edges_from(self, src: str, kind: EdgeKind) -> None:
        """Drop all outgoing edges of one kind from ``src``."""
        with self._lock:
            for dst, k in list(self._out.get(src, ())):
                if k is kind:
                    self._out[src].discard((dst, k))
                    self._in[dst].discard((src, k))
                    self._edge_counts[kind] -= 1
            self._touch()

    def remove_edges(self, kinds: set[EdgeKind]) -> None:
        """Drop every edge of the given kinds (used by re-resolution passes)."""
        with self._lock:
            for src, entries in self._out.items():
                keep = {e for e in entries if e[1] not in kinds}
                self._out[src] = keep
            for dst, entries in self._in.items():
                self._in[dst] = {e for e in entries if e[1] not in kinds}
            for kind in kinds:
                self._edge_counts[kind] = 0
            self._touch()

    def has_edge(self, src: str, dst: str, kind: EdgeKind) -> bool:
        return (dst, kind) in self._out.get(src, ())

    def edges(self) -> list[Edge]:
        out = []
        for src, entries in self._out.items():
            for dst, kind in entries:
                out.append(Edge(src, dst, kind))
        return out

    def out_edges(self, node_id: str, kind: EdgeKind | None = None) -> list[tuple[str, EdgeKind]]:
        entries = self._out.get(node_id, set())
        if kind is None:
            return sorted(entries)
        return sorted(e for e in entries if e[1] is kind)

    def in_edges(self, node_id: str, kind: EdgeKind | None = None) -> list[tuple[str, EdgeKind]]:
        entries = self._in.get(node_id, set())
        if kind is None:
            return sorted(entries)
        return sorted(e for e in entries if e[1] is kind)

    def edge_count(self) -> int:
        return sum(self._edge_counts.values())

    # -------------------------------------------------------------- traversal

    def _csr_index(self) -> _CsrIndex:
        with self._lock:
            if self._csr is None:
                self._csr = _CsrIndex(list(self._nodes.keys()), self.edges())
            return self._csr

    def neighbors(
        self,
        seeds: set[str],
        edge_kinds: set[EdgeKind] | None = None,
        direction: str = "outgoing",
        depth: int = 1,
        allowed_kinds: set[NodeKind] | None = None,
    ) -> set[str]:
        """Nodes reachable from the seeds within ``depth`` hops.

        Traversal follows edges of ``edge_kinds`` in ``direction``; the reached
        set is then filtered to ``allowed_kinds``. Seeds are never part of the
        result.
        """
        if depth < 1:
            raise ValueError("depth must be >= 1")
        if direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        for seed in seeds:
            if seed not in self._nodes:
                raise UnknownNodeError(seed)
        if not seeds:
            return set()
        kinds = set(EdgeKind) if edge_kinds is None else set(edge_kinds)
        mask = 0
        for kind in kinds:
            mask |= 1 << EDGE_KIND_BIT[kind]
        csr = self._csr_index()
        seed_idx = np.array(sorted(csr.index_of[s] for s in seeds), dtype=np.int64)
        reached = _kernels.bfs_reachable(
            len(csr.ids),
            csr.out_indptr,
            csr.out_indices,
            csr.out_kinds,
            csr.in_indptr,
            csr.in_indices,
            csr.in_kinds,
            seed_idx,
            mask,
            depth,
            direction in ("outgoing", "both"),
            direction in ("incoming", "both"),
        )
        result = {csr.ids[i] for i in reached}
        if allowed_kinds is not None:
            allowed = set(allowed_kinds)
            result = {nid for nid in result if self._nodes[nid].kind in allowed}
        return result

    def subgraph(self, node_ids: set[str]) -> tuple[list[Node], list[Edge]]:
        """The given nodes plus all edges with both endpoints inside the set."""
        for nid in node_ids:
            if nid not in self._nodes:
                raise UnknownNodeError(nid)
        nodes = [self._nodes[nid] for nid in sorted(node_ids)]
        edges = [
            Edge(src, dst, kind)
            for src in sorted(node_ids)
            for dst, kind in sorted(self._out.get(src, ()))
            if dst in node_ids
        ]
        return nodes, edges

    # ------------------------------------------------------------------ stats

    def stats(self) -> GraphStats:
        node_counts = Counter(n.kind.value for n in self._nodes.values())
        file_types = Counter(
            classify_file_type(n.path) for n in self._nodes.values() if n.kind is NodeKind.FILE
        )
        nodes_by_kind = {k.value: node_counts.get(k.value, 0) for k in NodeKind}
        edges_by_kind = {k.value: self._edge_counts.get(k, 0) for k in EdgeKind}
        return GraphStats(
            nodes_by_kind=nodes_by_kind,
            edges_by_kind=edges_by_kind,
            total_nodes=sum(nodes_by_kind.values()),
            total_edges=sum(edges_by_kind.values()),
            file_types={b: file_types.get(b, 0) for b in ("source", "documentation", "other")},
        )

    # ------------------------------------------------------------- invariants

    def validate(self) -> list[str]:
        """Whole-graph invariant check; returns a list of violations."""
        problems = []
        roots = [n for n in self._nodes.values() if n.kind is NodeKind.ROOT]
        if len(roots) != 1:
            problems.append(f"expected exactly one Root, found {len(roots)}")
            return problems
        root = roots[0]
        # Contains edges over Root/Folder/File must form a forest rooted at Root
        tree_parent: dict[str, str] = {}
        for src, entries in self._out.items():
            src_kind = self._nodes[src].kind
            if src_kind not in (NodeKind.ROOT, NodeKind.FOLDER):
                continue
            for dst, kind in entries:
                if kind is not EdgeKind.CONTAINS:
                    continue
                if dst in tree_parent:
                    problems.append(f"node {dst} has multiple Contains parents")
                tree_parent[dst] = src
        for node in self._nodes.values():
            if node.kind in (NodeKind.FOLDER, NodeKind.FILE):
                cur, hops = node.id, 0
                while cur != root.id and hops <= len(self._nodes):
                    if cur not in tree_parent:
                        problems.append(f"{node.kind.value} {node.path!r} not reachable from Root")
                        break
                    cur = tree_parent[cur]
                    hops += 1
            elif node.kind in ENTITY_KINDS:
                covered = any(
                    kind in (EdgeKind.IMPLEMENTS, EdgeKind.CONTAINS)
                    for _, kind in self._in.get(node.id, ())
                )
                if not covered:
                    problems.append(
                        f"{node.kind.value} {node.qualified_name!r} lacks an Implements/Contains edge"
                    )
        return problems

    # ------------------------------------------------------------ equivalence

    def content_hash(self) -> str:
        """Hash of the full graph value, ids and enrichment included."""
        payload = {
            "header": [self.graph_id, self.repo_url, self.revision, self.embedding_dim,
                       self.provider_fingerprint],
            "nodes": sorted(
                (nid, _hashable_fields(node)) for nid, node in self._nodes.items()
            ),
            "edges": sorted((e.src, e.dst, e.kind.value) for e in self.edges()),
        }
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def _identity_str(self, node: Node) -> str:
        parts = []
        cur: Node | None = node
        guard = 0
        while cur is not None and guard <= len(self._nodes):
            parts.append(f"{cur.kind.value}:{cur.path}:{cur.qualified_name}")
            cur = self._nodes.get(cur.parent_id) if cur.parent_id else None
            guard += 1
        return "|".join(parts)

    def structural_signature(self, include_timestamps: bool = False) -> dict:
        """Identity-keyed value of the graph, independent of id assignment order.

        Used to compare an incrementally updated graph against a from-scratch
        rebuild, where node ids legitimately differ.
        """
        node_sig = {}
        for node in self._nodes.values():
            fields = node.value_fields(include_timestamps=include_timestamps)
            fields.pop("id")
            fields.pop("parent_id")
            fields["description_embedding"] = (
                fields["description_embedding"].hex() if fields["description_embedding"] else None
            )
            fields["code_embedding"] = (
                fields["code_embedding"].hex() if fields["code_embedding"] else None
            )
            node_sig[self._identity_str(node)] = fields
        edge_sig = sorted(
            f"{self._identity_str(self._nodes[e.src])} -{e.kind.value}-> "
            f"{self._identity_str(self._nodes[e.dst])}"
            for e in self.edges()
        )
        return {"nodes": node_sig, "edges": edge_sig}

    # ------------------------------------------------------------------ misc

    def _touch(self) -> None:
        self.updated_at = utc_now()
        self._csr = None

    def copy(self) -> "KnowledgeGraph":
        """Deep value copy with fresh lock and caches."""
        twin = KnowledgeGraph(
            graph_id=self.graph_id,
            repo_url=self.repo_url,
            revision=self.revision,
            embedding_dim=self.embedding_dim,
            provider_fingerprint=self.provider_fingerprint,
        )
        twin.created_at = self.created_at
        twin.updated_at = self.updated_at
        twin._nodes = {nid: node.copy() for nid, node in self._nodes.items()}
        twin._out = {nid: set(entries) for nid, entries in self._out.items()}
        twin._in = {nid: set(entries) for nid, entries in self._in.items()}
        twin._edge_counts = Counter(self._edge_counts)
        twin._identity_to_id = dict(self._identity_to_id)
        twin._path_index = dict(self._path_index)
        twin._root_id = self._root_id
        twin._next_id = self._next_id
        twin.parse_records = json.loads(json.dumps(self.parse_records))
        twin.diagnostics = json.loads(json.dumps(self.diagnostics))
        return twin

    def __deepcopy__(self, memo) -> "KnowledgeGraph":
        return self.copy()

    def header(self) -> dict:
        return {
            "format_version": 1,
            "graph_id": self.graph_id,
            "repo_url": self.repo_url,
            "revision": self.revision,
            "embedding_dim": self.embedding_dim,
            "provider_fingerprint": self.provider_fingerprint,
            "created_at": format_ts(self.created_at),
            "updated_at": format_ts(self.updated_at),
        }


def _hashable_fields(node: Node) -> list:
    fields = node.value_fields()
    fields["description_embedding"] = (
        fields["description_embedding"].hex() if fields["description_embedding"] else None
    )
    fields["code_embedding"] = fields["code_embedding"].hex() if fields["code_embedding"] else None
    return sorted(fields.items())
