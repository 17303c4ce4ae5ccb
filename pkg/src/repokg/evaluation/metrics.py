"""Retrieval metrics: recall/precision, top-k variants, F-beta.

Violated preconditions raise, never silently return 0: recall over an empty
relevant set and precision over an empty retrieved list are undefined.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence

from ..errors import MetricUndefinedError

DEFAULT_BETA = 3.0  # recall-weighted


def _overlap(retrieved: Sequence[str], relevant: set[str]) -> int:
    return len(set(retrieved) & set(relevant))


def recall(retrieved: Sequence[str], relevant: set[str]) -> float:
    if not relevant:
        raise MetricUndefinedError("recall is undefined for an empty relevant set")
    return _overlap(retrieved, relevant) / len(set(relevant))


def precision(retrieved: Sequence[str], relevant: set[str]) -> float:
    if not retrieved:
        raise MetricUndefinedError("precision is undefined for an empty retrieved list")
    return _overlap(retrieved, relevant) / len(list(retrieved))


def recall_at_k(retrieved: Sequence[str], relevant: set[str], k: int) -> float:
    if k < 1:
        raise MetricUndefinedError("k must be >= 1")
    if not relevant:
        raise MetricUndefinedError("recall@k is undefined for an empty relevant set")
    top = list(retrieved)[: min(k, len(retrieved))]
    return _overlap(top, relevant) / len(set(relevant))


def precision_at_k(retrieved: Sequence[str], relevant: set[str], k: int) -> float:
    """Denominator is k itself: positions past the end of the list count as misses."""
    if k < 1:
        raise MetricUndefinedError("k must be >= 1")
    top = list(retrieved)[: min(k, len(retrieved))]
    return _overlap(top, relevant) / k


def fbeta(p: float, r: float, beta: float = DEFAULT_BETA) -> float:
    if beta <= 0:
        raise MetricUndefinedError("beta must be positive")
    if p == 0.0 and r == 0.0:
        return 0.0
    b2 = beta * beta
    return (1.0 + b2) * p * r / (b2 * p + r)


def fbeta_at_k(retrieved: Sequence[str], relevant: set[str], k: int, beta: float = DEFAULT_BETA) -> float:
    return fbeta(precision_at_k(retrieved, relevant, k), recall_at_k(retrieved, relevant, k), beta)


@dataclass
class MetricRow:
    recall: float
    precision: float
    recall_at_k: float
    precision_at_k: float
    fbeta_at_k: float
    k: int
    beta: float
    found: bool

    def as_dict(self) -> dict:
        return {
            "recall": self.recall,
            "precision": self.precision,
            "recall_at_k": self.recall_at_k,
            "precision_at_k": self.precision_at_k,
            "fbeta_at_k": self.fbeta_at_k,
            "k": self.k,
            "beta": self.beta,
            "found": self.found,
        }


def compute_row(
    retrieved: Sequence[str], relevant: set[str], k: int, beta: float = DEFAULT_BETA
) -> MetricRow:
    retrieved = list(retrieved)
    relevant = set(relevant)
    r_at_k = recall_at_k(retrieved, relevant, k)
    p_at_k = precision_at_k(retrieved, relevant, k)
    return MetricRow(
        recall=recall(retrieved, relevant),
        precision=precision(retrieved, relevant) if retrieved else 0.0,
        recall_at_k=r_at_k,
        precision_at_k=p_at_k,
        fbeta_at_k=fbeta(p_at_k, r_at_k, beta),
        k=k,
        beta=beta,
        found=_overlap(retrieved, relevant) > 0,
    )


def median(values: Sequence[float]) -> float:
    """Median with the even-count convention: mean of the two middle values."""
    if not values:
        raise MetricUndefinedError("median of an empty sequence")
    return float(statistics.median(values))
