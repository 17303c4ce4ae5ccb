from __future__ import annotations

import subprocess
from pathlib import Path

import numpy as np
import pytest

from repokg.graph import KnowledgeGraph
from repokg.model import EdgeKind, Node, NodeKind
from repokg.enrich import StubEmbedder, StubSummarizer


def make_node(kind: NodeKind, name: str, path: str = "", **kwargs) -> Node:
    defaults = {}
    if kind is NodeKind.FILE:
        defaults = {"language": "python", "size_bytes": 0}
    defaults.update(kwargs)
    return Node(id="", kind=kind, name=name, path=path, **defaults)


def add_file(graph: KnowledgeGraph, path: str, parent: str | None = None, **kwargs) -> str:
    parent = parent or graph.root_id
    node_id = graph.upsert_node(make_node(NodeKind.FILE, path.rsplit("/", 1)[-1], path, **kwargs))
    graph.add_edge(parent, node_id, EdgeKind.CONTAINS)
    return node_id


def add_function(graph: KnowledgeGraph, path: str, qual: str, file_id: str, kind=NodeKind.FUNCTION,
                 parent_id: str | None = None, **kwargs) -> str:
    node = Node(
        id="",
        kind=kind,
        name=qual.rsplit(".", 1)[-1],
        path=path,
        qualified_name=qual,
        parent_id=parent_id or file_id,
        **kwargs,
    )
    node_id = graph.upsert_node(node)
    graph.add_edge(parent_id or file_id, node_id, EdgeKind.IMPLEMENTS)
    return node_id


@pytest.fixture
def empty_graph() -> KnowledgeGraph:
    g = KnowledgeGraph(graph_id="gtest", repo_url="fixture", revision="r0")
    g.upsert_node(make_node(NodeKind.ROOT, "fixture"))
    return g


@pytest.fixture
def summarizer() -> StubSummarizer:
    return StubSummarizer()


@pytest.fixture
def embedder() -> StubEmbedder:
    return StubEmbedder(dim=64, seed=0)


def git(repo: Path, *args: str) -> str:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args], capture_output=True, text=True, check=True
    )
    return proc.stdout.strip()


def init_git_repo(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    subprocess.run(["git", "init", "-q", "-b", "main", str(path)], check=True)
    git(path, "config", "user.email", "tests@example.invalid")
    git(path, "config", "user.name", "Test Fixture")
    return path


def commit_all(repo: Path, message: str) -> str:
    git(repo, "add", "-A")
    git(repo, "commit", "-q", "-m", message, "--allow-empty")
    return git(repo, "rev-parse", "HEAD")


def write_tree(root: Path, files: dict[str, str]) -> None:
    for rel, content in files.items():
        target = root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")


@pytest.fixture
def scripted_repo(tmp_path: Path):
    """Three-commit fixture exercising add/modify/delete with cross-file calls."""
    repo = init_git_repo(tmp_path / "scripted")
    write_tree(
        repo,
        {
            "pkg/__init__.py": "",
            "pkg/core.py": (
                '"""Core helpers."""\n\n\ndef load(path):\n    """Load a config file."""\n'
                "    return path\n\n\ndef drop():\n    return None\n"
            ),
            "pkg/extra.py": (
                "from pkg import core\n\n\ndef wrap(path):\n    return core.load(path)\n"
            ),
            "README.md": "# scripted fixture\n",
        },
    )
    c1 = commit_all(repo, "initial layout")
    write_tree(
        repo,
        {
            "pkg/core.py": (
                '"""Core helpers."""\n\n\ndef load(path):\n    """Load and validate a config '
                'file."""\n    return validate(path)\n\n\ndef validate(path):\n    return path\n'
            ),
            "pkg/cli.py": (
                "from pkg.core import load\n\n\ndef main(path):\n    return load(path)\n"
            ),
        },
    )
    (repo / "pkg/extra.py").unlink()
    c2 = commit_all(repo, "add cli, rework core, drop extra")
    write_tree(
        repo,
        {
            "pkg/cli.py": (
                "from pkg.core import load, validate\n\n\ndef main(path):\n"
                "    return load(path)\n\n\ndef check(path):\n    return validate(path)\n"
            ),
            "tests/test_core.py": (
                "from pkg.core import load\n\n\ndef test_load():\n    assert load('x')\n"
            ),
        },
    )
    c3 = commit_all(repo, "extend cli and add tests")
    return repo, (c1, c2, c3)
