"""Repository file access: worktree and git-revision readers, ignore rules.

A reader lists candidate files and serves their bytes. Git-backed checkouts
use ``git ls-files`` / ``git show`` so the repository's own ignore rules are
honored exactly; plain directories fall back to a walk with a .gitignore
subset plus defaults (VCS metadata, oversized binaries, generated lockfiles).
"""

from __future__ import annotations

import fnmatch
import os
import subprocess
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..errors import IngestError

BINARY_SNIFF_BYTES = 8192
BINARY_SIZE_CAP = 1024 * 1024  # binaries above this are not indexed at all

LOCKFILE_NAMES = {
    "poetry.lock",
    "package-lock.json",
    "yarn.lock",
    "pnpm-lock.yaml",
    "cargo.lock",
    "gemfile.lock",
    "composer.lock",
    "pipfile.lock",
    "uv.lock",
}

DEFAULT_IGNORED_DIRS = {
    ".git",
    ".hg",
    ".svn",
    "__pycache__",
    ".mypy_cache",
    ".pytest_cache",
    ".ruff_cache",
    "node_modules",
    ".venv",
    "venv",
    ".tox",
    ".idea",
    ".vscode",
    "dist",
    "build",
    ".eggs",
}


@dataclass(frozen=True)
class RepoRef:
    """A local checkout plus the revision the graph should be pinned to."""

    url_or_path: str
    revision: str = ""
    branch: str | None = None


def looks_binary(data: bytes) -> bool:
    return b"\x00" in data[:BINARY_SNIFF_BYTES]


def run_git(repo: str | Path, *args: str) -> str:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise IngestError(f"git {' '.join(args)} failed: {proc.stderr.strip()}")
    return proc.stdout


def run_git_bytes(repo: str | Path, *args: str) -> bytes:
    proc = subprocess.run(["git", "-C", str(repo), *args], capture_output=True)
    if proc.returncode != 0:
        raise IngestError(f"git {' '.join(args)} failed: {proc.stderr.decode().strip()}")
    return proc.stdout


def resolve_revision(repo: str | Path, rev: str) -> str:
    try:
        return run_git(repo, "rev-parse", "--verify", f"{rev}^{{commit}}").strip()
    except IngestError as exc:
        raise IngestError(f"revision {rev!r} does not resolve in {repo}: {exc}") from None


class _GitIgnoreMatcher:
    """A pragmatic subset of .gitignore semantics for non-git directories:
    comments, negation, dir-only patterns, anchored and floating globs."""

    def __init__(self, lines: list[str]):
        self.rules: list[tuple[bool, bool, bool, str]] = []  # (negated, dir_only, anchored, pattern)
        for raw in lines:
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            negated = line.startswith("!")
            if negated:
                line = line[1:]
            dir_only = line.endswith("/")
            line = line.rstrip("/")
            anchored = line.startswith("/") or "/" in line
            line = line.lstrip("/")
            self.rules.append((negated, dir_only, anchored, line))

    def ignores(self, rel_path: str, is_dir: bool) -> bool:
        ignored = False
        basename = rel_path.rsplit("/", 1)[-1]
        for negated, dir_only, anchored, pattern in self.rules:
            if dir_only and not is_dir:
                continue
            target = rel_path if anchored else basename
            if "**" in pattern:
                matched = fnmatch.fnmatch(rel_path, pattern.replace("**/", "*").replace("/**", "*"))
            else:
                matched = fnmatch.fnmatch(target, pattern)
            if matched:
                ignored = not negated
        return ignored


def _default_skip(rel_path: str) -> bool:
    parts = rel_path.split("/")
    if any(part in DEFAULT_IGNORED_DIRS for part in parts[:-1]):
        return True
    return parts[-1].lower() in LOCKFILE_NAMES


@dataclass
class RepoFile:
    path: str
    size_bytes: int


class WorktreeReader:
    """Reads the checkout on disk; uses git's file listing when available."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise IngestError(f"checkout path {self.root} is not a directory")
        self._is_git = (self.root / ".git").exists()

    def list_files(self) -> list[RepoFile]:
        out: list[RepoFile] = []
        if self._is_git:
            listing = run_git(self.root, "ls-files", "-z").split("\0")
            for rel in listing:
                if not rel or _default_skip(rel):
                    continue
                full = self.root / rel
                if not full.is_file():
                    continue
                out.append(RepoFile(rel, full.stat().st_size))
        else:
            matcher = _GitIgnoreMatcher(self._gitignore_lines())
            for dirpath, dirnames, filenames in os.walk(self.root):
                rel_dir = os.path.relpath(dirpath, self.root).replace(os.sep, "/")
                rel_dir = "" if rel_dir == "." else rel_dir
                dirnames[:] = sorted(
                    d
                    for d in dirnames
                    if d not in DEFAULT_IGNORED_DIRS
                    and not matcher.ignores(f"{rel_dir}/{d}".lstrip("/"), is_dir=True)
                )
                for fname in sorted(filenames):
                    rel = f"{rel_dir}/{fname}".lstrip("/")
                    if _default_skip(rel) or matcher.ignores(rel, is_dir=False):
                        continue
                    out.append(RepoFile(rel, (self.root / rel).stat().st_size))
        return sorted(out, key=lambda f: f.path)

    def _gitignore_lines(self) -> list[str]:
        gi = self.root / ".gitignore"
        return gi.read_text(encoding="utf-8", errors="replace").splitlines() if gi.is_file() else []

    def read_bytes(self, path: str) -> bytes:
        return (self.root / path).read_bytes()

    def mtime(self, path: str) -> datetime:
        return datetime.fromtimestamp((self.root / path).stat().st_mtime, tz=timezone.utc)


class GitRevReader:
    """Reads file contents at a pinned revision via ``git show``, without
    requiring the worktree to be checked out at that revision."""

    def __init__(self, root: str | Path, revision: str):
        self.root = Path(root)
        self.revision = resolve_revision(self.root, revision)
        ts = int(run_git(self.root, "log", "-1", "--format=%ct", self.revision).strip())
        self._commit_time = datetime.fromtimestamp(ts, tz=timezone.utc)

    def list_files(self) -> list[RepoFile]:
        out = []
        for line in run_git(self.root, "ls-tree", "-r", "-l", self.revision).splitlines():
            # <mode> <type> <hash> <size>\t<path>
            meta, _, rel = line.partition("\t")
            fields = meta.split()
            if len(fields) < 4 or fields[1] != "blob":
                continue
            if _default_skip(rel):
                continue
            size = 0 if fields[3] == "-" else int(fields[3])
            out.append(RepoFile(rel, size))
        return sorted(out, key=lambda f: f.path)

    def read_bytes(self, path: str) -> bytes:
        return run_git_bytes(self.root, "show", f"{self.revision}:{path}")

    def mtime(self, path: str) -> datetime:
        return self._commit_time


def open_reader(repo: RepoRef):
    """Pick a reader for the ref and return (reader, resolved_revision).

    Unresolvable revisions are a hard error. A revision on a git checkout that
    differs from HEAD is read through ``git show`` so no checkout switching is
    needed.
    """
    root = Path(repo.url_or_path)
    if not root.is_dir():
        raise IngestError(f"repository path {repo.url_or_path!r} does not exist locally")
    is_git = (root / ".git").exists()
    if repo.revision:
        if not is_git:
            raise IngestError(f"revision {repo.revision!r} given but {root} is not a git checkout")
        resolved = resolve_revision(root, repo.revision)
        head = run_git(root, "rev-parse", "HEAD").strip()
        if head == resolved and not run_git(root, "status", "--porcelain").strip():
            return WorktreeReader(root), resolved
        return GitRevReader(root, resolved), resolved
    if is_git:
        head = run_git(root, "rev-parse", "HEAD").strip()
        return WorktreeReader(root), head
    return WorktreeReader(root), ""
