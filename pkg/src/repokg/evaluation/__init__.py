"""Metrics, issue->PR test cases, evaluation runs, and A/B comparisons."""

from .cases import (
    HostClient,
    OfflineHostClient,
    TestCase,
    closed_issues,
    generate_test_cases,
    load_cases,
    normalize_path,
    save_cases,
)
from .harness import AbComparison, EvalReport, ab_compare, render_report_table, run_eval
from .metrics import (
    DEFAULT_BETA,
    MetricRow,
    compute_row,
    fbeta,
    fbeta_at_k,
    median,
    precision,
    precision_at_k,
    recall,
    recall_at_k,
)

__all__ = [
    "recall",
    "precision",
    "recall_at_k",
    "precision_at_k",
    "fbeta",
    "fbeta_at_k",
    "compute_row",
    "median",
    "MetricRow",
    "DEFAULT_BETA",
    "TestCase",
    "HostClient",
    "OfflineHostClient",
    "generate_test_cases",
    "closed_issues",
    "save_cases",
    "load_cases",
    "normalize_path",
    "run_eval",
    "ab_compare",
    "render_report_table",
    "EvalReport",
    "AbComparison",
]
