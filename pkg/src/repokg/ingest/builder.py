"""Graph construction from a repository checkout.

Three passes: ``build_skeleton`` initializes Root/Folder/File nodes with raw
content and metadata, ``parse_repository`` adds code entities and resolves
cross-file relations, ``link_tests`` connects test artifacts to what they
exercise. Per-file parse records are kept on the graph so incremental updates
can re-resolve relations without re-reading unchanged files.
"""

from __future__ import annotations

import hashlib
import logging

from ..errors import IngestError
from ..graph import KnowledgeGraph
from ..model import (
    ENTITY_KINDS,
    EdgeKind,
    Node,
    NodeKind,
    classify_file_type,
    language_for_path,
)
from .adapters import AdapterParseError, ParsedFile, ParserAdapter, adapter_for
from .files import BINARY_SIZE_CAP, RepoFile, RepoRef, looks_binary, open_reader

log = logging.getLogger(__name__)

TEST_DIR_SEGMENTS = {"test", "tests", "testing"}


def file_language(path: str, is_binary: bool) -> str:
    lang = language_for_path(path)
    if lang:
        return lang
    if is_binary:
        return "binary"
    if classify_file_type(path) == "documentation":
        return "markdown" if path.lower().endswith((".md", ".markdown")) else "text"
    return "text"


def _tech_summary(name: str, languages: set[str], top_entries: set[str]) -> str:
    return (
        f"Repository {name}.\n"
        f"Languages: {', '.join(sorted(languages)) or 'none'}.\n"
        f"Top-level: {', '.join(sorted(top_entries)) or 'empty'}."
    )


def compute_tech_summary(graph: KnowledgeGraph) -> str:
    root = graph.node(graph.root_id)
    languages = {
        n.language
        for n in graph.nodes_by_kind(NodeKind.FILE)
        if n.language not in (None, "binary", "text", "markdown")
    }
    top = {n.path.split("/")[0] for n in graph.nodes() if n.path}
    return _tech_summary(root.name, languages, top)


def ensure_folder_chain(graph: KnowledgeGraph, path: str) -> str:
    """Create missing Folder nodes for ``path``'s directories; returns the id
    of the node that should contain the file (Root for top-level files)."""
    parent_id = graph.root_id
    if "/" not in path:
        return parent_id
    prefix = ""
    for segment in path.split("/")[:-1]:
        prefix = f"{prefix}/{segment}" if prefix else segment
        existing = graph.node_by_identity((NodeKind.FOLDER.value, prefix, segment, None))
        if existing is None:
            folder = Node(id="", kind=NodeKind.FOLDER, name=segment, path=prefix)
            folder_id = graph.upsert_node(folder)
            graph.add_edge(parent_id, folder_id, EdgeKind.CONTAINS)
        else:
            folder_id = existing.id
        parent_id = folder_id
    return parent_id


def ingest_file(graph: KnowledgeGraph, reader, repo_file: RepoFile) -> Node | None:
    """Create or refresh the File node for one repository file.

    Oversized binaries are skipped entirely; other binaries become nodes
    without raw content. Returns None when the file was skipped.
    """
    path = repo_file.path
    try:
        data = reader.read_bytes(path)
    except OSError as exc:
        log.warning("skipping unreadable file %s: %s", path, exc)
        return None
    is_binary = looks_binary(data)
    if is_binary and len(data) > BINARY_SIZE_CAP:
        return None
    text = None
    if not is_binary and len(data) <= BINARY_SIZE_CAP:
        text = data.decode("utf-8", errors="replace")
    parent_id = ensure_folder_chain(graph, path)
    node = Node(
        id="",
        kind=NodeKind.FILE,
        name=path.rsplit("/", 1)[-1],
        path=path,
        language=file_language(path, is_binary),
        size_bytes=len(data),
        raw_content=text,
        last_modified=reader.mtime(path),
    )
    node_id = graph.upsert_node(node)
    graph.add_edge(parent_id, node_id, EdgeKind.CONTAINS)
    return graph.node(node_id)


def build_skeleton(repo: RepoRef, filters=None) -> KnowledgeGraph:
    """Root + Folder/File tree with metadata and raw content, no code entities."""
    reader, revision = open_reader(repo)
    repo_name = str(repo.url_or_path).rstrip("/").rsplit("/", 1)[-1] or "repository"
    graph_id = "g" + hashlib.sha256(f"{repo.url_or_path}@{revision}".encode()).hexdigest()[:12]
    graph = KnowledgeGraph(graph_id=graph_id, repo_url=str(repo.url_or_path), revision=revision)
    root = Node(id="", kind=NodeKind.ROOT, name=repo_name, path="")
    graph.upsert_node(root)
    skipped = []
    for repo_file in reader.list_files():
        if filters is not None and not filters(repo_file.path):
            continue
        if ingest_file(graph, reader, repo_file) is None:
            skipped.append(repo_file.path)
    graph.update_node_fields(graph.root_id, raw_content=compute_tech_summary(graph))
    graph.diagnostics = {"skipped_files": skipped}
    return graph


# --------------------------------------------------------------------- parse


def apply_parsed_file(graph: KnowledgeGraph, file_node: Node, parsed: ParsedFile) -> None:
    """Reconcile a file's entity nodes and Implements edges with a fresh parse.

    Entities keep their node id (and enrichment, when their raw content is
    unchanged) through the identity key; vanished entities are removed.
    """
    path = file_node.path
    old_nodes = {n.identity_key(): n for n in graph.nodes_by_file(path)}
    implements_sources = {file_node.id} | {
        n.id for n in old_nodes.values() if n.kind is NodeKind.CLASS
    }
    seen: set[tuple] = set()
    class_ids: dict[str, str] = {}
    for entity in parsed.entities:
        if entity.kind is NodeKind.CLASS:
            parent_id = file_node.id
        elif entity.parent is not None:
            parent_id = class_ids.get(entity.parent)
            if parent_id is None:
                continue  # parent class failed to land; skip member
        else:
            parent_id = file_node.id
        node = Node(
            id="",
            kind=entity.kind,
            name=entity.name,
            path=path,
            qualified_name=entity.qualified_name,
            parent_id=parent_id,
            signature=entity.signature,
            docstring=entity.docstring,
            raw_content=entity.raw_content,
            line_span=entity.line_span,
            last_modified=file_node.last_modified,
        )
        previous = old_nodes.get(node.identity_key())
        if previous is not None and previous.raw_content == entity.raw_content:
            node.description = previous.description
            node.description_embedding = previous.description_embedding
            node.code_embedding = previous.code_embedding
            node.last_modified = previous.last_modified
        node_id = graph.upsert_node(node)
        seen.add(node.identity_key())
        if entity.kind is NodeKind.CLASS:
            class_ids[entity.qualified_name] = node_id
    for key, stale in old_nodes.items():
        if key not in seen and stale.id in graph:
            graph.remove_node(stale.id)
    # rebuild Implements for this file from the surviving sources
    for src in implements_sources | set(class_ids.values()):
        if src in graph:
            graph.remove_edges_from(src, EdgeKind.IMPLEMENTS)
    for entity in parsed.entities:
        key = (entity.kind.value, path, entity.qualified_name,
               class_ids.get(entity.parent) if entity.parent else file_node.id)
        target = graph.node_by_identity(key)
        if target is None:
            continue
        src = class_ids[entity.parent] if entity.parent else file_node.id
        graph.add_edge(src, target.id, EdgeKind.IMPLEMENTS)
    if file_node.docstring != parsed.module_docstring:
        graph.update_node_fields(file_node.id, docstring=parsed.module_docstring)
    graph.parse_records[path] = parsed.record()


def parse_repository(
    graph: KnowledgeGraph, adapters: dict[str, ParserAdapter] | None = None
) -> KnowledgeGraph:
    """Extract entities and relations from every parseable File node."""
    failures: list[str] = []
    for file_node in graph.nodes_by_kind(NodeKind.FILE):
        adapter = adapter_for(file_node.language, adapters)
        if adapter is None or file_node.raw_content is None:
            continue
        try:
            parsed = adapter.parse(file_node.raw_content, file_node.path)
        except AdapterParseError as exc:
            log.warning("parse failed: %s", exc)
            failures.append(file_node.path)
            continue
        apply_parsed_file(graph, file_node, parsed)
    unresolved = resolve_relations(graph)
    graph.diagnostics = {
        "parse_failures": sorted(failures),
        "unresolved_relations": unresolved,
        **{k: v for k, v in graph.diagnostics.items() if k == "skipped_files"},
    }
    return graph


# ---------------------------------------------------------- relation linking


def _module_parts(path: str) -> tuple[str, ...] | None:
    if not path.endswith((".py", ".pyi")):
        return None
    trimmed = path.rsplit(".", 1)[0]
    parts = trimmed.split("/")
    if parts[-1] == "__init__":
        parts = parts[:-1]
    return tuple(parts) if parts else None


class _SymbolTable:
    def __init__(self, graph: KnowledgeGraph):
        self.graph = graph
        self.modules: dict[tuple[str, ...], str] = {}
        self.by_tail: dict[str, list[tuple[tuple[str, ...], str]]] = {}
        self.entities: dict[str, dict[str, tuple[str, NodeKind]]] = {}
        self.by_name: dict[str, list[tuple[str, str, str, NodeKind]]] = {}
        for node in graph.nodes_by_kind(NodeKind.FILE):
            parts = _module_parts(node.path)
            if parts:
                self.modules[parts] = node.path
                self.by_tail.setdefault(parts[-1], []).append((parts, node.path))
        for node in graph.nodes():
            if node.kind not in ENTITY_KINDS:
                continue
            self.entities.setdefault(node.path, {})[node.qualified_name] = (node.id, node.kind)
            self.by_name.setdefault(node.name, []).append(
                (node.path, node.qualified_name, node.id, node.kind)
            )

    def resolve_module(self, parts: tuple[str, ...]) -> str | None:
        """Module path -> file path, matching the dotted path as a suffix of
        the file's module path (tolerates src/ style layout prefixes)."""
        if not parts:
            return None
        exact = self.modules.get(parts)
        if exact:
            return exact
        candidates = [
            (len(mod), path)
            for mod, path in self.by_tail.get(parts[-1], [])
            if len(mod) >= len(parts) and mod[-len(parts):] == parts
        ]
        if not candidates:
            return None
        return sorted(candidates)[0][1]

    def entity_in_file(self, path: str, qualified: str) -> tuple[str, NodeKind] | None:
        return self.entities.get(path, {}).get(qualified)

    def unique_by_name(self, name: str, kinds: frozenset[NodeKind]) -> tuple[str, NodeKind] | None:
        hits = [(p, q, i, k) for p, q, i, k in self.by_name.get(name, []) if k in kinds]
        if len(hits) == 1:
            return hits[0][2], hits[0][3]
        return None


def _relative_base(path: str, level: int) -> tuple[str, ...]:
    parts = _module_parts(path) or tuple(path.split("/")[:-1])
    package = parts[:-1] if not path.endswith("__init__.py") else parts
    drop = level - 1
    return package[: len(package) - drop] if drop else package


def _build_bindings(path: str, record: dict, table: _SymbolTable):
    """Local name -> ("module", parts) or ("symbol", file path, original name).

    Returns (bindings, referenced file paths, count of unresolvable imports).
    """
    bindings: dict[str, tuple] = {}
    refers: set[str] = set()
    unresolved = 0
    for imp in record.get("imports", []):
        module = tuple(p for p in imp.get("module", "").split(".") if p)
        level = imp.get("level", 0)
        if level:
            module = _relative_base(path, level) + module
        names = imp.get("names") or []
        if not names:
            target = table.resolve_module(module)
            if target:
                refers.add(target)
                if imp.get("alias"):
                    bindings[imp["alias"]] = ("module", module)
            else:
                unresolved += 1
        else:
            for name, local in names:
                if name == "*":
                    target = table.resolve_module(module)
                    if target:
                        refers.add(target)
                    else:
                        unresolved += 1
                    continue
                as_module = table.resolve_module(module + (name,))
                if as_module:
                    refers.add(as_module)
                    bindings[local] = ("module", module + (name,))
                    continue
                target = table.resolve_module(module)
                if target:
                    refers.add(target)
                    bindings[local] = ("symbol", target, name)
                else:
                    unresolved += 1
    return bindings, refers, unresolved


def _resolve_callable(
    path: str,
    src_qual: str,
    parts: tuple[str, ...],
    bindings: dict,
    table: _SymbolTable,
) -> tuple[str, NodeKind] | None:
    funcs = frozenset({NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION})
    if parts[0] in ("self", "cls") and len(parts) == 2 and "." in src_qual:
        owner = src_qual.rsplit(".", 1)[0]
        return table.entity_in_file(path, f"{owner}.{parts[1]}")
    if len(parts) == 1:
        name = parts[0]
        hit = table.entity_in_file(path, name)
        if hit:
            return hit
        bound = bindings.get(name)
        if bound and bound[0] == "symbol":
            return table.entity_in_file(bound[1], bound[2])
        if bound and bound[0] == "module":
            return None
        return table.unique_by_name(name, funcs | frozenset({NodeKind.CLASS}))
    head, rest = parts[0], parts[1:]
    bound = bindings.get(head)
    if bound is not None:
        if bound[0] == "module":
            module = bound[1]
            target_file = table.resolve_module(module + rest[:-1]) if len(rest) > 1 else None
            if target_file:
                hit = table.entity_in_file(target_file, rest[-1])
                if hit:
                    return hit
            target_file = table.resolve_module(module)
            if target_file:
                return table.entity_in_file(target_file, ".".join(rest))
            return None
        if bound[0] == "symbol" and len(rest) == 1:
            return table.entity_in_file(bound[1], f"{bound[2]}.{rest[0]}")
        return None
    class_hit = table.entity_in_file(path, head)
    if class_hit and class_hit[1] is NodeKind.CLASS and len(rest) == 1:
        return table.entity_in_file(path, f"{head}.{rest[0]}")
    return None


def resolve_relations(graph: KnowledgeGraph) -> dict[str, int]:
    """Re-derive Calls/Inherits/Refers edges from the per-file parse records.

    Dynamic or out-of-repository targets are dropped and counted; the pass is
    idempotent and is re-run after incremental updates.
    """
    graph.remove_edges({EdgeKind.CALLS, EdgeKind.INHERITS, EdgeKind.REFERS})
    table = _SymbolTable(graph)
    unresolved = {"Calls": 0, "Inherits": 0, "Refers": 0}
    for path, record in sorted(graph.parse_records.items()):
        file_node = graph.node_by_path(path)
        if file_node is None or file_node.kind is not NodeKind.FILE:
            continue
        bindings, refers, missed_imports = _build_bindings(path, record, table)
        unresolved["Refers"] += missed_imports
        for target_path in sorted(refers):
            if target_path == path:
                continue
            target = graph.node_by_path(target_path)
            if target is not None:
                graph.add_edge(file_node.id, target.id, EdgeKind.REFERS)
        for src_qual, parts in record.get("calls", []):
            src = table.entity_in_file(path, src_qual)
            hit = _resolve_callable(path, src_qual, tuple(parts), bindings, table)
            if hit is not None and hit[1] is NodeKind.CLASS:
                # constructor call: route to __init__ when present
                target_node = graph.node(hit[0])
                hit = table.entity_in_file(target_node.path, f"{target_node.qualified_name}.__init__")
            if src is None or hit is None or hit[1] is NodeKind.CLASS:
                unresolved["Calls"] += 1
                continue
            graph.add_edge(src[0], hit[0], EdgeKind.CALLS)
        for src_qual, parts in record.get("inherits", []):
            src = table.entity_in_file(path, src_qual)
            hit = _resolve_callable(path, src_qual, tuple(parts), bindings, table)
            if src is None or hit is None or hit[1] is not NodeKind.CLASS:
                unresolved["Inherits"] += 1
                continue
            graph.add_edge(src[0], hit[0], EdgeKind.INHERITS)
    return unresolved


# ----------------------------------------------------------------- test links


def is_test_path(path: str) -> bool:
    parts = path.split("/")
    stem = parts[-1].rsplit(".", 1)[0]
    if any(p in TEST_DIR_SEGMENTS for p in parts[:-1]):
        return True
    return stem.startswith("test_") or stem.endswith("_test") or stem in TEST_DIR_SEGMENTS


def strip_test_name(name: str) -> str:
    if name.startswith("test_"):
        return name[5:]
    if name.endswith("_test"):
        return name[: -len("_test")]
    return name


def link_tests(graph: KnowledgeGraph) -> int:
    """Connect test files/functions to same-named non-test files and functions."""
    graph.remove_edges({EdgeKind.TESTS})
    files = graph.nodes_by_kind(NodeKind.FILE)
    non_test_by_stem: dict[str, list[Node]] = {}
    for node in files:
        if is_test_path(node.path):
            continue
        stem = node.name.rsplit(".", 1)[0]
        non_test_by_stem.setdefault(stem, []).append(node)
    added = 0
    for test_file in sorted((f for f in files if is_test_path(f.path)), key=lambda n: n.path):
        stem = test_file.name.rsplit(".", 1)[0]
        stripped = strip_test_name(stem)
        targets = sorted(non_test_by_stem.get(stripped, []), key=lambda n: n.path)
        if not targets:
            continue
        test_functions = [
            n
            for n in graph.nodes_by_file(test_file.path)
            if n.kind in (NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION)
            and n.name.startswith("test")
        ]
        for target in targets:
            graph.add_edge(test_file.id, target.id, EdgeKind.TESTS)
            added += 1
            target_functions = {
                n.name: n
                for n in graph.nodes_by_file(target.path)
                if n.kind in (NodeKind.FUNCTION, NodeKind.MEMBER_FUNCTION)
            }
            for tf in sorted(test_functions, key=lambda n: n.qualified_name):
                match = target_functions.get(strip_test_name(tf.name))
                if match is not None and not graph.has_edge(tf.id, match.id, EdgeKind.TESTS):
                    graph.add_edge(tf.id, match.id, EdgeKind.TESTS)
                    added += 1
    graph.diagnostics["tests_linked"] = True
    return added
