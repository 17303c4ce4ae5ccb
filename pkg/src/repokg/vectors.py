"""Embedding vector helpers: normalization and byte-level encoding."""

from __future__ import annotations

import base64

import numpy as np

from .errors import DimensionMismatchError


def as_unit_f32(values, dim: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float32 unit vector.

    Rejects all-zero input; enforces ``dim`` when given. Stored embeddings are
    always L2-normalized so cosine reduces to a dot product.
    """
    vec = np.asarray(values, dtype=np.float32).reshape(-1)
    if dim is not None and vec.shape[0] != dim:
        raise DimensionMismatchError(f"expected dim {dim}, got {vec.shape[0]}")
    norm = float(np.linalg.norm(vec.astype(np.float64)))
    if norm == 0.0:
        raise ValueError("all-zero vector cannot be normalized")
    return (vec.astype(np.float64) / norm).astype(np.float32)


def encode_b64_f32(vec: np.ndarray) -> str:
    """Little-endian float32 bytes as base64 text."""
    return base64.b64encode(np.asarray(vec, dtype="<f4").tobytes()).decode("ascii")


def decode_b64_f32(data: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(data.encode("ascii")), dtype="<f4").astype(np.float32)
