"""Cosine similarity between embedding vectors."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DimensionMismatchError


def cosine_similarity(a, b) -> float:
    """sum(a_i * b_i) / (||a|| * ||b||), computed in float64.

    Both vectors must share a dimension and be non-zero. For stored unit
    vectors this reduces to the dot product.
    """
    va = np.asarray(a, dtype=np.float64).reshape(-1)
    vb = np.asarray(b, dtype=np.float64).reshape(-1)
    if va.shape[0] != vb.shape[0]:
        raise DimensionMismatchError(f"dim mismatch: {va.shape[0]} vs {vb.shape[0]}")
    norm_a = math.sqrt(float(va @ va))
    norm_b = math.sqrt(float(vb @ vb))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine similarity is undefined for zero vectors")
    return float(va @ vb) / (norm_a * norm_b)
