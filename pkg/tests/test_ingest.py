"""Skeleton build, python adapter extraction, relation resolution, test links,
revision diffs, incremental updates."""

from __future__ import annotations

from pathlib import Path

import pytest

from repokg.errors import IngestError, RevisionMismatchError
from repokg.ingest import (
    ChangeSet,
    PythonAdapter,
    RepoRef,
    build_skeleton,
    diff_revisions,
    link_tests,
    parse_repository,
    update_graph,
)
from repokg.ingest.builder import is_test_path, strip_test_name
from repokg.model import EdgeKind, NodeKind

from conftest import commit_all, git, init_git_repo, write_tree


class TestSkeleton:
    def test_empty_directory(self, tmp_path):
        (tmp_path / "empty").mkdir()
        g = build_skeleton(RepoRef(str(tmp_path / "empty")))
        assert g.stats().nodes_by_kind == {
            "Root": 1, "Folder": 0, "File": 0, "Class": 0, "Function": 0, "MemberFunction": 0,
        }

    def test_two_dirs_three_files(self, tmp_path):
        root = tmp_path / "proj"
        write_tree(root, {"a/x.py": "x = 1\n", "a/b/y.py": "y = 2\n", "top.md": "# t\n"})
        g = build_skeleton(RepoRef(str(root)))
        stats = g.stats()
        assert stats.nodes_by_kind["Folder"] == 2
        assert stats.nodes_by_kind["File"] == 3
        assert stats.edges_by_kind["Contains"] == 5
        assert g.validate() == []
        file_node = g.node_by_path("a/b/y.py")
        assert file_node.language == "python"
        assert file_node.size_bytes == 6
        assert file_node.raw_content == "y = 2\n"

    def test_gitignore_and_defaults_respected(self, tmp_path):
        root = tmp_path / "proj"
        write_tree(
            root,
            {
                ".gitignore": "generated/\n*.tmp\n",
                "generated/junk.py": "raise\n",
                "scratch.tmp": "x",
                "poetry.lock": "locked",
                "keep.py": "k = 1\n",
            },
        )
        g = build_skeleton(RepoRef(str(root)))
        paths = {n.path for n in g.nodes_by_kind(NodeKind.FILE)}
        assert paths == {".gitignore", "keep.py"}

    def test_unresolvable_revision_is_hard_error(self, tmp_path):
        repo = init_git_repo(tmp_path / "r")
        write_tree(repo, {"a.py": "a = 1\n"})
        commit_all(repo, "c1")
        with pytest.raises(IngestError, match="deadbeef"):
            build_skeleton(RepoRef(str(repo), revision="deadbeef"))

    def test_oversized_binary_skipped(self, tmp_path):
        root = tmp_path / "proj"
        root.mkdir()
        (root / "big.bin").write_bytes(b"\x00" + b"\xff" * (1024 * 1024 + 10))
        (root / "small.bin").write_bytes(b"\x00\x01\x02")
        (root / "a.py").write_text("a = 1\n")
        g = build_skeleton(RepoRef(str(root)))
        paths = {n.path for n in g.nodes_by_kind(NodeKind.FILE)}
        assert paths == {"small.bin", "a.py"}
        assert g.node_by_path("small.bin").language == "binary"
        assert g.diagnostics["skipped_files"] == ["big.bin"]


SAMPLE = '''"""Commands for creating projects."""

from helpers import slugify
import util


class BaseCommand:
    """Shared command plumbing."""

    def handle(self):
        """Run the command."""
        return slugify(self.name)


class NewCommand(BaseCommand):
    def handle(self):
        base = util.default_name()
        return make_project(base)


def make_project(name):
    """Create a new project."""
    return name
'''


class TestPythonAdapter:
    def test_entities_extracted(self):
        parsed = PythonAdapter().parse(SAMPLE, "commands/new.py")
        by_qual = {e.qualified_name: e for e in parsed.entities}
        assert set(by_qual) == {
            "BaseCommand", "BaseCommand.handle", "NewCommand", "NewCommand.handle", "make_project",
        }
        assert by_qual["BaseCommand"].kind is NodeKind.CLASS
        assert by_qual["BaseCommand.handle"].kind is NodeKind.MEMBER_FUNCTION
        assert by_qual["make_project"].kind is NodeKind.FUNCTION
        assert by_qual["make_project"].docstring == "Create a new project."
        assert by_qual["make_project"].signature == "(name)"
        assert parsed.module_docstring == "Commands for creating projects."
        assert by_qual["NewCommand"].line_span[0] > by_qual["BaseCommand"].line_span[0]

    def test_relations_recorded(self):
        parsed = PythonAdapter().parse(SAMPLE, "commands/new.py")
        assert ("NewCommand", ("BaseCommand",)) in parsed.inherits
        assert ("NewCommand.handle", ("make_project",)) in parsed.calls
        assert ("NewCommand.handle", ("util", "default_name")) in parsed.calls
        modules = {i.module for i in parsed.imports}
        assert modules == {"helpers", "util"}

    def test_deterministic(self):
        a = PythonAdapter().parse(SAMPLE, "x.py")
        b = PythonAdapter().parse(SAMPLE, "x.py")
        assert a.record() == b.record()
        assert [e.qualified_name for e in a.entities] == [e.qualified_name for e in b.entities]


class TestParseRepository:
    def test_single_function_file(self, tmp_path):
        root = tmp_path / "proj"
        write_tree(root, {"m.py": "def solo():\n    return 1\n"})
        g = parse_repository(build_skeleton(RepoRef(str(root))))
        stats = g.stats()
        assert stats.nodes_by_kind["Function"] == 1
        assert stats.edges_by_kind["Implements"] == 1

    def test_import_produces_refers_edge(self, tmp_path):
        root = tmp_path / "proj"
        write_tree(root, {"a.py": "import b\n", "b.py": "x = 1\n"})
        g = parse_repository(build_skeleton(RepoRef(str(root))))
        a, b = g.node_by_path("a.py"), g.node_by_path("b.py")
        assert g.has_edge(a.id, b.id, EdgeKind.REFERS)

    def test_cross_file_call_and_inheritance(self, tmp_path):
        root = tmp_path / "proj"
        write_tree(
            root,
            {
                "pkg/__init__.py": "",
                "pkg/base.py": "class Base:\n    def run(self):\n        return 0\n",
                "pkg/impl.py": (
                    "from pkg.base import Base\n\n\nclass Impl(Base):\n"
                    "    def run(self):\n        return helper()\n\n\ndef helper():\n    return 1\n"
                ),
            },
        )
        g = parse_repository(build_skeleton(RepoRef(str(root))))
        impl = next(n for n in g.nodes() if n.qualified_name == "Impl")
        base = next(n for n in g.nodes() if n.qualified_name == "Base")
        helper = next(n for n in g.nodes() if n.qualified_name == "helper")
        run = next(n for n in g.nodes() if n.qualified_name == "Impl.run")
        assert g.has_edge(impl.id, base.id, EdgeKind.INHERITS)
        assert g.has_edge(run.id, helper.id, EdgeKind.CALLS)
        assert g.validate() == []

    def test_parse_failure_isolated(self, tmp_path):
        root = tmp_path / "proj"
        write_tree(root, {"bad.py": "def broken(:\n", "good.py": "def ok():\n    return 1\n"})
        g = parse_repository(build_skeleton(RepoRef(str(root))))
        assert g.diagnostics["parse_failures"] == ["bad.py"]
        assert g.stats().nodes_by_kind["Function"] == 1

    def test_unresolved_targets_counted(self, tmp_path):
        root = tmp_path / "proj"
        write_tree(root, {"a.py": "import missing\n\n\ndef f():\n    return ghost()\n"})
        g = parse_repository(build_skeleton(RepoRef(str(root))))
        unresolved = g.diagnostics["unresolved_relations"]
        assert unresolved["Refers"] == 1
        assert unresolved["Calls"] == 1


class TestLinkTests:
    def test_same_name_heuristic(self, tmp_path):
        root = tmp_path / "proj"
        write_tree(
            root,
            {
                "src/init.py": "def seed():\n    return 1\n",
                "tests/test_init.py": "def test_seed():\n    assert True\n",
            },
        )
        g = parse_repository(build_skeleton(RepoRef(str(root))))
        added = link_tests(g)
        test_file = g.node_by_path("tests/test_init.py")
        target = g.node_by_path("src/init.py")
        assert g.has_edge(test_file.id, target.id, EdgeKind.TESTS)
        seed_fn = next(n for n in g.nodes() if n.qualified_name == "seed")
        test_fn = next(n for n in g.nodes() if n.qualified_name == "test_seed")
        assert g.has_edge(test_fn.id, seed_fn.id, EdgeKind.TESTS)
        assert added == 2

    def test_no_test_dir_yields_zero(self, tmp_path):
        root = tmp_path / "proj"
        write_tree(root, {"a.py": "x = 1\n", "b.py": "y = 2\n"})
        g = parse_repository(build_skeleton(RepoRef(str(root))))
        assert link_tests(g) == 0

    def test_path_rules(self):
        assert is_test_path("tests/console/test_new.py")
        assert is_test_path("pkg/foo_test.py")
        assert not is_test_path("src/poetry/console/new.py")
        assert strip_test_name("test_init") == "init"
        assert strip_test_name("init_test") == "init"


class TestDiffRevisions:
    def test_identical_revisions_empty(self, scripted_repo):
        repo, (c1, _, _) = scripted_repo
        change = diff_revisions(str(repo), c1, c1)
        assert change.is_empty()

    def test_add_modify_delete_classified(self, scripted_repo):
        repo, (c1, c2, _) = scripted_repo
        change = diff_revisions(str(repo), c1, c2)
        assert change.added == {"pkg/cli.py"}
        assert change.modified == {"pkg/core.py"}
        assert change.deleted == {"pkg/extra.py"}

    def test_non_descendant_rejected(self, scripted_repo):
        repo, (c1, c2, _) = scripted_repo
        with pytest.raises(IngestError, match="descendant"):
            diff_revisions(str(repo), c2, c1)

    def test_rename_is_delete_plus_add(self, tmp_path):
        repo = init_git_repo(tmp_path / "ren")
        write_tree(repo, {"old_name.py": "value = 1\n"})
        c1 = commit_all(repo, "c1")
        git(repo, "mv", "old_name.py", "new_name.py")
        c2 = commit_all(repo, "c2")
        change = diff_revisions(str(repo), c1, c2)
        assert change.deleted == {"old_name.py"}
        assert change.added == {"new_name.py"}


def build_at(repo: Path, rev: str):
    g = build_skeleton(RepoRef(str(repo), revision=rev))
    parse_repository(g)
    link_tests(g)
    return g


class TestUpdateGraph:
    def test_empty_changeset_noop(self, scripted_repo):
        repo, (c1, _, _) = scripted_repo
        g = build_at(repo, c1)
        sig_before = g.structural_signature()
        update_graph(g, ChangeSet(old_revision=c1, new_revision=c1), str(repo))
        assert g.structural_signature() == sig_before

    def test_revision_mismatch_hard_error(self, scripted_repo):
        repo, (c1, c2, c3) = scripted_repo
        g = build_at(repo, c1)
        with pytest.raises(RevisionMismatchError):
            update_graph(g, diff_revisions(str(repo), c2, c3), str(repo))

    def test_delete_cascades_entities_and_edges(self, scripted_repo):
        repo, (c1, c2, _) = scripted_repo
        g = build_at(repo, c1)
        wrap = next(n for n in g.nodes() if n.qualified_name == "wrap")
        assert wrap is not None
        update_graph(g, diff_revisions(str(repo), c1, c2), str(repo))
        assert not any(n.qualified_name == "wrap" for n in g.nodes())
        assert all(e.src in g and e.dst in g for e in g.edges())

    def test_incremental_equals_full_rebuild(self, scripted_repo):
        repo, (c1, c2, c3) = scripted_repo
        g = build_at(repo, c1)
        update_graph(g, diff_revisions(str(repo), c1, c2), str(repo))
        update_graph(g, diff_revisions(str(repo), c2, c3), str(repo))
        rebuilt = build_at(repo, c3)
        assert g.structural_signature() == rebuilt.structural_signature()
        assert g.revision == rebuilt.revision
