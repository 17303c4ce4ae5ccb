"""CLI subcommands: build/stats/search/cluster/eval, exit codes, JSON output."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from repokg.cli import cli, main
from repokg.evaluation import TestCase as EvalCase, save_cases

from conftest import commit_all, init_git_repo, write_tree


@pytest.fixture
def demo_repo(tmp_path):
    repo = init_git_repo(tmp_path / "demo")
    write_tree(
        repo,
        {
            "pkg/api.py": '"""HTTP handlers."""\n\n\ndef serve():\n    """Serve requests."""\n    return 1\n',
            "pkg/db.py": '"""Database layer."""\n\n\ndef connect():\n    """Open a connection."""\n    return None\n',
            "README.md": "# demo\n",
        },
    )
    rev = commit_all(repo, "c1")
    return repo, rev


def run_cli(*args) -> tuple[int, str]:
    runner = CliRunner()
    result = runner.invoke(cli, list(args), catch_exceptions=False)
    return result.exit_code, result.output


class TestBuildAndStats:
    def test_build_writes_snapshot_and_prints_stats(self, tmp_path, demo_repo):
        repo, rev = demo_repo
        out = tmp_path / "g.json"
        code, output = run_cli("build", "--repo", str(repo), "--rev", rev,
                               "--out", str(out), "--no-llm", "--dim", "64")
        assert code == 0
        assert out.exists()
        assert "total nodes" in output

    def test_build_json_output(self, tmp_path, demo_repo):
        repo, rev = demo_repo
        out = tmp_path / "g.json"
        code, output = run_cli("build", "--repo", str(repo), "--out", str(out),
                               "--no-llm", "--dim", "64", "--json")
        assert code == 0
        doc = json.loads(output)
        assert doc["stats"]["nodes_by_kind"]["File"] == 3
        assert doc["revision"] == rev

    def test_stats_roundtrip(self, tmp_path, demo_repo):
        repo, _ = demo_repo
        out = tmp_path / "g.json"
        run_cli("build", "--repo", str(repo), "--out", str(out), "--no-llm", "--dim", "64")
        code, output = run_cli("stats", "--graph", str(out), "--json")
        assert code == 0
        assert json.loads(output)["nodes_by_kind"]["Root"] == 1


class TestSearchCommand:
    def test_search_rows_capped_at_k(self, tmp_path, demo_repo):
        repo, _ = demo_repo
        out = tmp_path / "g.json"
        run_cli("build", "--repo", str(repo), "--out", str(out), "--no-llm", "--dim", "64")
        code, output = run_cli("search", "--graph", str(out), "--query",
                               "open a database connection", "--k", "2", "--no-llm", "--json")
        assert code == 0
        results = json.loads(output)["results"]
        assert 1 <= len(results) <= 2
        assert results[0]["path"] == "pkg/db.py"


class TestClusterCommand:
    def test_cluster_json(self, tmp_path, demo_repo):
        repo, _ = demo_repo
        out = tmp_path / "g.json"
        run_cli("build", "--repo", str(repo), "--out", str(out), "--no-llm", "--dim", "64")
        code, output = run_cli("cluster", "--graph", str(out), "--method", "louvain",
                               "--min-size", "1", "--json")
        assert code == 0
        doc = json.loads(output)
        assert doc["method"] == "louvain"
        assert set(doc["quality"]) == {"count", "sizes", "unassigned", "score"}


class TestEvalCommand:
    def test_eval_table_shape(self, tmp_path, demo_repo):
        repo, _ = demo_repo
        out = tmp_path / "g.json"
        run_cli("build", "--repo", str(repo), "--out", str(out), "--no-llm", "--dim", "64")
        cases = [EvalCase(repo="demo", revision="", issue_id=1,
                          issue_text="open a database connection", pr_id=1,
                          ground_truth=["pkg/db.py"])]
        cases_path = tmp_path / "cases.jsonl"
        save_cases(cases, cases_path)
        code, output = run_cli("eval", "--graph", str(out), "--cases", str(cases_path),
                               "--k", "10", "--no-llm")
        assert code == 0
        assert "Median Recall@10" in output
        assert "percentage found" in output

    def test_eval_ab_discovery(self, tmp_path, demo_repo):
        repo, _ = demo_repo
        out = tmp_path / "g.json"
        run_cli("build", "--repo", str(repo), "--out", str(out), "--no-llm", "--dim", "64")
        cases = [EvalCase(repo="demo", revision="", issue_id=1,
                          issue_text="serve requests but broken in pkg/db.py", pr_id=1,
                          ground_truth=["pkg/db.py"])]
        cases_path = tmp_path / "cases.jsonl"
        save_cases(cases, cases_path)
        code, output = run_cli("eval", "--graph", str(out), "--cases", str(cases_path),
                               "--k", "1", "--no-llm", "--ab", "discovery")
        assert code == 0
        assert "with-discovery" in output


class TestExitCodes:
    def test_usage_error_is_1(self):
        assert main(["search", "--query", "x"]) == 1  # missing --graph

    def test_operational_error_is_2(self, tmp_path):
        bogus = tmp_path / "not_a_snapshot.json"
        bogus.write_text("{broken")
        assert main(["stats", "--graph", str(bogus)]) == 2

    def test_success_is_0(self, tmp_path, demo_repo):
        repo, _ = demo_repo
        out = tmp_path / "g.json"
        assert main(["build", "--repo", str(repo), "--out", str(out),
                     "--no-llm", "--dim", "32"]) == 0

    def test_console_script_entry(self, tmp_path, demo_repo):
        repo, _ = demo_repo
        out = tmp_path / "g.json"
        proc = subprocess.run(
            [sys.executable, "-m", "repokg.cli", "build", "--repo", str(repo),
             "--out", str(out), "--no-llm", "--dim", "32", "--json"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert json.loads(proc.stdout)["stats"]["nodes_by_kind"]["Root"] == 1
