"""Graph store: many graphs per process, single writer per graph, background jobs."""

from __future__ import annotations

import threading
import traceback
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..graph import KnowledgeGraph
from ..model import format_ts, utc_now
from ..snapshot import load_snapshot, save_snapshot


class GraphRegistry:
    """In-memory registry backed by snapshot files in the store directory.

    Readers fetch the current graph object; writers build a replacement and
    swap it in atomically, so concurrent searches see either the old or the
    new graph, never a mixture.
    """

    def __init__(self, store_dir: str | Path):
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)
        self._graphs: dict[str, KnowledgeGraph] = {}
        self._write_locks: dict[str, threading.Lock] = {}
        self._lock = threading.Lock()

    def _snapshot_path(self, graph_id: str) -> Path:
        return self.store_dir / f"{graph_id}.json"

    def ids(self) -> list[str]:
        with self._lock:
            known = set(self._graphs)
        known.update(p.stem for p in self.store_dir.glob("*.json"))
        return sorted(known)

    def get(self, graph_id: str) -> KnowledgeGraph:
        with self._lock:
            hit = self._graphs.get(graph_id)
        if hit is not None:
            return hit
        path = self._snapshot_path(graph_id)
        if not path.exists():
            raise KeyError(graph_id)
        graph = load_snapshot(path)
        with self._lock:
            return self._graphs.setdefault(graph_id, graph)

    def put(self, graph: KnowledgeGraph, persist: bool = True) -> None:
        if persist:
            save_snapshot(graph, self._snapshot_path(graph.graph_id))
        with self._lock:
            self._graphs[graph.graph_id] = graph

    def write_lock(self, graph_id: str) -> threading.Lock:
        with self._lock:
            return self._write_locks.setdefault(graph_id, threading.Lock())


@dataclass
class Job:
    id: str
    kind: str
    status: str = "queued"  # queued | running | done | failed
    graph_id: str | None = None
    error: str | None = None
    created_at: str = field(default_factory=lambda: format_ts(utc_now()))
    finished_at: str | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class JobRunner:
    """Serial background runner: one build/update executes at a time."""

    def __init__(self):
        self._executor = ThreadPoolExecutor(max_workers=1)
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, kind: str, fn) -> Job:
        job = Job(id=uuid.uuid4().hex[:12], kind=kind)
        with self._lock:
            self._jobs[job.id] = job

        def run():
            job.status = "running"
            try:
                job.graph_id = fn()
                job.status = "done"
            except Exception as exc:
                job.status = "failed"
                job.error = f"{type(exc).__name__}: {exc}"
                traceback.print_exc()
            finally:
                job.finished_at = format_ts(utc_now())

        self._executor.submit(run)
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            if job_id not in self._jobs:
                raise KeyError(job_id)
            return self._jobs[job_id]

    def shutdown(self, wait: bool = True) -> None:
        self._executor.shutdown(wait=wait)
