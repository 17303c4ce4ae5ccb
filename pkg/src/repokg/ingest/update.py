"""Commit-to-commit graph updates.

``diff_revisions`` classifies file-level changes between two commits on the
same branch (renames are modeled as delete+add). ``update_graph`` applies a
change set in place: re-parsing only the touched files, reconciling entity
nodes by identity, then re-running the global relation and test-link passes so
the result matches a from-scratch build at the new revision.
"""

from __future__ import annotations

import logging
import subprocess
from dataclasses import dataclass, field

from ..errors import IngestError, RevisionMismatchError
from ..graph import KnowledgeGraph
from ..model import EdgeKind, NodeKind
from .adapters import AdapterParseError, ParserAdapter, adapter_for
from .builder import (
    apply_parsed_file,
    compute_tech_summary,
    ingest_file,
    link_tests,
    resolve_relations,
)
from .files import GitRevReader, RepoFile, resolve_revision, run_git

log = logging.getLogger(__name__)


@dataclass
class ChangeSet:
    added: set[str] = field(default_factory=set)
    modified: set[str] = field(default_factory=set)
    deleted: set[str] = field(default_factory=set)
    old_revision: str = ""
    new_revision: str = ""

    def is_empty(self) -> bool:
        return not (self.added or self.modified or self.deleted)


def diff_revisions(repo_path: str, old_rev: str, new_rev: str) -> ChangeSet:
    """Exact file-level change classification between two commits.

    ``new_rev`` must be a descendant of ``old_rev`` on the same branch;
    anything else is rejected so incremental updates cannot drift.
    """
    old = resolve_revision(repo_path, old_rev)
    new = resolve_revision(repo_path, new_rev)
    change = ChangeSet(old_revision=old, new_revision=new)
    if old == new:
        return change
    rc = subprocess.run(
        ["git", "-C", str(repo_path), "merge-base", "--is-ancestor", old, new],
        capture_output=True,
    ).returncode
    if rc != 0:
        raise IngestError(
            f"revision {new_rev} is not a descendant of {old_rev}; "
            "updates must follow the same branch"
        )
    status = run_git(repo_path, "diff", "--name-status", "--no-renames", old, new)
    for line in status.splitlines():
        if not line.strip():
            continue
        code, _, path = line.partition("\t")
        if code.startswith("A"):
            change.added.add(path)
        elif code.startswith("D"):
            change.deleted.add(path)
        else:  # M, T and friends are content changes
            change.modified.add(path)
    return change


def prune_empty_folders(graph: KnowledgeGraph) -> None:
    while True:
        empty = [
            node
            for node in graph.nodes_by_kind(NodeKind.FOLDER)
            if not graph.out_edges(node.id, EdgeKind.CONTAINS)
        ]
        if not empty:
            return
        for node in empty:
            graph.remove_node(node.id)


def _delete_file(graph: KnowledgeGraph, path: str) -> None:
    for entity in graph.nodes_by_file(path):
        if entity.id in graph:
            graph.remove_node(entity.id)
    node = graph.node_by_path(path)
    if node is not None and node.kind is NodeKind.FILE:
        graph.remove_node(node.id)
    graph.parse_records.pop(path, None)


def update_graph(
    graph: KnowledgeGraph,
    change_set: ChangeSet,
    repo_path: str,
    adapters: dict[str, ParserAdapter] | None = None,
) -> KnowledgeGraph:
    """Apply a change set in place and pin the graph to the new revision.

    Touched nodes lose their enrichment (descriptions/embeddings) so the
    enrich stage can refresh exactly the stale subset.
    """
    if graph.revision != change_set.old_revision:
        raise RevisionMismatchError(
            f"graph is at {graph.revision!r} but change set starts at "
            f"{change_set.old_revision!r}"
        )
    if change_set.is_empty():
        graph._touch()
        graph.revision = change_set.new_revision or graph.revision
        return graph
    reader = GitRevReader(repo_path, change_set.new_revision)
    sizes = {f.path: f.size_bytes for f in reader.list_files()}
    relink_tests = bool(graph.diagnostics.get("tests_linked"))
    failures = [
        p
        for p in graph.diagnostics.get("parse_failures", [])
        if p not in change_set.modified and p not in change_set.deleted
    ]

    for path in sorted(change_set.deleted):
        _delete_file(graph, path)
    for path in sorted(change_set.added | change_set.modified):
        if path not in sizes:
            log.warning("changed path %s not present at %s; treating as delete",
                        path, change_set.new_revision[:12])
            _delete_file(graph, path)
            continue
        previous = graph.node_by_path(path)
        if previous is not None and previous.kind is NodeKind.FILE:
            old_raw = previous.raw_content
        else:
            old_raw = None
        file_node = ingest_file(graph, reader, RepoFile(path, sizes[path]))
        if file_node is None:
            _delete_file(graph, path)
            continue
        if old_raw is not None and old_raw == file_node.raw_content and previous is not None:
            # content identical (e.g. mode-only change): keep enrichment
            graph.update_node_fields(
                file_node.id,
                description=previous.description,
                description_embedding=previous.description_embedding,
                code_embedding=previous.code_embedding,
                docstring=previous.docstring,
                last_modified=previous.last_modified,
            )
            file_node = graph.node(file_node.id)
        adapter = adapter_for(file_node.language, adapters)
        if adapter is None or file_node.raw_content is None:
            for entity in graph.nodes_by_file(path):
                graph.remove_node(entity.id)
            graph.parse_records.pop(path, None)
            continue
        try:
            parsed = adapter.parse(file_node.raw_content, path)
        except AdapterParseError as exc:
            log.warning("parse failed during update: %s", exc)
            failures.append(path)
            for entity in graph.nodes_by_file(path):
                graph.remove_node(entity.id)
            graph.parse_records.pop(path, None)
            continue
        apply_parsed_file(graph, file_node, parsed)

    prune_empty_folders(graph)
    new_summary = compute_tech_summary(graph)
    root = graph.node(graph.root_id)
    if root.raw_content != new_summary:
        graph.update_node_fields(
            graph.root_id,
            raw_content=new_summary,
            description=None,
            description_embedding=None,
        )
    unresolved = resolve_relations(graph)
    graph.diagnostics = {
        "parse_failures": sorted(set(failures)),
        "unresolved_relations": unresolved,
    }
    if relink_tests:
        link_tests(graph)
    graph.revision = change_set.new_revision
    return graph
