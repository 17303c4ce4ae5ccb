"""Content-addressed cache for provider outputs.

Keys are SHA-256 over (provider identity, prompt/template version, input
text); entries are immutable once written, so concurrent writers of the same
key are harmless (the values are identical by construction). An optional
sqlite backend persists entries across runs.
"""

from __future__ import annotations

import hashlib
import sqlite3
import threading
from pathlib import Path

import numpy as np

from ..model import format_ts, utc_now
from ..vectors import decode_b64_f32, encode_b64_f32


def cache_key(provider_identity: str, prompt_version: str, payload: str) -> str:
    blob = f"{provider_identity}\x00{prompt_version}\x00{payload}".encode()
    return hashlib.sha256(blob).hexdigest()


class EnrichmentCache:
    def __init__(self, path: str | Path | None = None):
        self._mem: dict[str, str] = {}
        self._lock = threading.RLock()
        self._db: sqlite3.Connection | None = None
        if path is not None:
            self._db = sqlite3.connect(str(path), check_same_thread=False)
            self._db.execute(
                "CREATE TABLE IF NOT EXISTS entries ("
                "key TEXT PRIMARY KEY, value TEXT NOT NULL, created_at TEXT NOT NULL)"
            )
            self._db.commit()

    def get_text(self, key: str) -> str | None:
        return self._get(key)

    def put_text(self, key: str, value: str) -> None:
        self._put(key, value)

    def get_vector(self, key: str) -> np.ndarray | None:
        raw = self._get(key)
        return None if raw is None else decode_b64_f32(raw)

    def put_vector(self, key: str, vec: np.ndarray) -> None:
        self._put(key, encode_b64_f32(vec))

    def _get(self, key: str) -> str | None:
        with self._lock:
            hit = self._mem.get(key)
            if hit is not None:
                return hit
            if self._db is not None:
                row = self._db.execute("SELECT value FROM entries WHERE key = ?", (key,)).fetchone()
                if row is not None:
                    self._mem[key] = row[0]
                    return row[0]
        return None

    def _put(self, key: str, value: str) -> None:
        with self._lock:
            if key in self._mem:
                return
            self._mem[key] = value
            if self._db is not None:
                self._db.execute(
                    "INSERT OR IGNORE INTO entries (key, value, created_at) VALUES (?, ?, ?)",
                    (key, value, format_ts(utc_now())),
                )
                self._db.commit()

    def __len__(self) -> int:
        with self._lock:
            if self._db is not None:
                return int(self._db.execute("SELECT COUNT(*) FROM entries").fetchone()[0])
            return len(self._mem)

    def close(self) -> None:
        if self._db is not None:
            self._db.close()
            self._db = None
