"""Repository ingestion: skeleton build, parsing, test linking, incremental updates."""

from .adapters import (
    AdapterParseError,
    FallbackAdapter,
    ImportSpec,
    ParsedEntity,
    ParsedFile,
    ParserAdapter,
    PythonAdapter,
)
from .builder import build_skeleton, link_tests, parse_repository, resolve_relations
from .files import GitRevReader, RepoRef, WorktreeReader, open_reader
from .update import ChangeSet, diff_revisions, update_graph

__all__ = [
    "RepoRef",
    "WorktreeReader",
    "GitRevReader",
    "open_reader",
    "ParserAdapter",
    "PythonAdapter",
    "FallbackAdapter",
    "ParsedFile",
    "ParsedEntity",
    "ImportSpec",
    "AdapterParseError",
    "build_skeleton",
    "parse_repository",
    "link_tests",
    "resolve_relations",
    "ChangeSet",
    "diff_revisions",
    "update_graph",
]
