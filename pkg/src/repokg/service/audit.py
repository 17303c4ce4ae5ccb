"""Append-only audit log: one record per non-health request."""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from ..model import format_ts, utc_now


@dataclass
class AuditRecord:
    timestamp: str
    endpoint: str
    request_digest: str
    graph_id: str | None
    duration_ms: float
    outcome: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class AuditLog:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def record(
        self,
        endpoint: str,
        body: bytes,
        graph_id: str | None,
        duration_ms: float,
        outcome: str,
    ) -> AuditRecord:
        entry = AuditRecord(
            timestamp=format_ts(utc_now()),
            endpoint=endpoint,
            request_digest=hashlib.sha256(body or b"").hexdigest()[:16],
            graph_id=graph_id,
            duration_ms=round(duration_ms, 3),
            outcome=outcome,
        )
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry.as_dict()) + "\n")
        return entry

    def entries(self) -> list[dict]:
        if not self.path.exists():
            return []
        return [
            json.loads(line)
            for line in self.path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
