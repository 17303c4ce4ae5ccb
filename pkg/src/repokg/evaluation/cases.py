"""Issue -> ground-truth test cases mined from merged pull requests.

A merged PR becomes a test case when its description closes exactly one issue
through a closing keyword; the issue text is the query, the PR's modified
files are the ground truth. The host client is pluggable so suites can be
generated offline from recorded fixtures and replayed as JSON Lines.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from ..model import classify_file_type

log = logging.getLogger(__name__)

CLOSING_KEYWORD = re.compile(
    r"\b(?:close[sd]?|fix(?:e[sd])?|resolve[sd]?)\s*:?\s+#(\d+)", re.IGNORECASE
)


def normalize_path(path: str) -> str:
    path = path.replace("\\", "/").strip()
    while path.startswith("./"):
        path = path[2:]
    return path.lstrip("/")


@dataclass
class TestCase:
    repo: str
    revision: str
    issue_id: int
    issue_text: str
    pr_id: int
    ground_truth: list[str]
    created_at: str = ""

    def __post_init__(self):
        self.ground_truth = sorted({normalize_path(p) for p in self.ground_truth})
        if not self.ground_truth:
            raise ValueError(f"test case for issue #{self.issue_id} has empty ground truth")

    def as_dict(self) -> dict:
        return {
            "repo": self.repo,
            "revision": self.revision,
            "issue_id": self.issue_id,
            "issue_text": self.issue_text,
            "pr_id": self.pr_id,
            "ground_truth": self.ground_truth,
            "created_at": self.created_at,
        }


def save_cases(cases: list[TestCase], destination: str | Path) -> None:
    with open(destination, "w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(json.dumps(case.as_dict(), ensure_ascii=False) + "\n")


def load_cases(source: str | Path) -> list[TestCase]:
    cases = []
    for line_no, line in enumerate(Path(source).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            cases.append(TestCase(**doc))
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise ValueError(f"{source}:{line_no}: bad test case record: {exc}") from None
    return cases


class HostClient(Protocol):
    """Minimal slice of a code-host API used for test-case mining."""

    def merged_prs(self, repo: str, branch: str, cutoff_iso: str) -> list[dict]:
        """Each record: {id, description, merged_at, revision, files: [...]}."""
        ...

    def issue(self, repo: str, issue_id: int) -> dict:
        """Record: {id, title, body}."""
        ...


class OfflineHostClient:
    """Replays recorded PR/issue data from a JSON document or file."""

    def __init__(self, data: dict | str | Path):
        if not isinstance(data, dict):
            data = json.loads(Path(data).read_text(encoding="utf-8"))
        self._prs = data.get("prs", [])
        self._issues = {int(issue["id"]): issue for issue in data.get("issues", [])}

    def merged_prs(self, repo: str, branch: str, cutoff_iso: str) -> list[dict]:
        return [
            pr
            for pr in self._prs
            if pr.get("merged_at", "") >= cutoff_iso and pr.get("branch", branch) == branch
        ]

    def issue(self, repo: str, issue_id: int) -> dict:
        if issue_id not in self._issues:
            raise KeyError(f"issue #{issue_id} not in fixture")
        return self._issues[issue_id]


def closed_issues(pr_description: str) -> set[int]:
    return {int(m) for m in CLOSING_KEYWORD.findall(pr_description or "")}


def generate_test_cases(
    host_client: HostClient,
    repo: str,
    branch: str,
    cutoff_iso: str,
) -> list[TestCase]:
    """Mine test cases from merged PRs after the cutoff.

    PRs are kept when they close exactly one issue and touch at least one
    source file. Host failures on individual records degrade to partial
    results with a log entry; zero cases is a valid outcome.
    """
    cases: list[TestCase] = []
    try:
        prs = host_client.merged_prs(repo, branch, cutoff_iso)
    except Exception as exc:  # host API failure -> partial results contract
        log.error("host client failed listing PRs for %s: %s", repo, exc)
        return cases
    for pr in prs:
        issues = closed_issues(pr.get("description", ""))
        if len(issues) != 1:
            continue
        files = [normalize_path(p) for p in pr.get("files", [])]
        if not any(classify_file_type(p) == "source" for p in files):
            continue
        issue_id = issues.pop()
        try:
            issue = host_client.issue(repo, issue_id)
        except Exception as exc:
            log.error("host client failed on issue #%s: %s", issue_id, exc)
            continue
        title = issue.get("title", "").strip()
        body = issue.get("body", "").strip()
        cases.append(
            TestCase(
                repo=repo,
                revision=pr.get("revision", ""),
                issue_id=issue_id,
                issue_text=f"{title}\n\n{body}".strip(),
                pr_id=int(pr.get("id", 0)),
                ground_truth=files,
                created_at=pr.get("merged_at", ""),
            )
        )
    return cases
