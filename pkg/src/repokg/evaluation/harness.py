"""Evaluation runs and A/B comparisons with per-repository medians."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

from ..graph import KnowledgeGraph
from ..model import NodeKind
from ..retrieval import RetrievalRequest, SearchProviders, search_relevant
from .cases import TestCase
from .metrics import DEFAULT_BETA, MetricRow, compute_row, median

log = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "Repository",
    "Languages",
    "Test cases",
    "Files total",
    "Files returned",
    "% Files returned",
    "Median Recall@{k}",
    "Median Precision@{k}",
    "Median Fβ@{k}",
]


@dataclass
class EvalReport:
    repository: str
    languages: str
    test_cases: int
    failed_cases: int
    files_total: int
    files_returned: int
    pct_files_returned: float
    k: int
    beta: float
    median_recall_at_k: float
    median_precision_at_k: float
    median_fbeta_at_k: float
    percentage_found: float
    median_query_seconds: float
    median_query_seconds_no_llm: float
    build_seconds: float | None = None
    rows: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        out = dict(self.__dict__)
        return out

    def table_row(self) -> list[str]:
        return [
            self.repository,
            self.languages,
            str(self.test_cases),
            str(self.files_total),
            str(self.files_returned),
            f"{self.pct_files_returned:.1%}",
            _fmt(self.median_recall_at_k),
            _fmt(self.median_precision_at_k),
            _fmt(self.median_fbeta_at_k),
        ]


def _fmt(value: float) -> str:
    return f"{value:.3f}".rstrip("0").rstrip(".") or "0"


def graph_languages(graph: KnowledgeGraph) -> str:
    langs = sorted(
        {
            n.language
            for n in graph.nodes_by_kind(NodeKind.FILE)
            if n.language not in (None, "binary", "text", "markdown")
        }
    )
    return ", ".join(langs) if langs else "unknown"


def run_eval(
    graph: KnowledgeGraph,
    test_cases: list[TestCase],
    request_template: RetrievalRequest,
    providers: SearchProviders,
    beta: float = DEFAULT_BETA,
    build_seconds: float | None = None,
) -> EvalReport:
    """Evaluate every test case and aggregate per-repository medians.

    Failing cases are excluded from medians but counted in the report; every
    per-case metric row is kept for audit.
    """
    if not test_cases:
        raise ValueError("run_eval requires at least one test case")
    rows: list[dict] = []
    metric_rows: list[MetricRow] = []
    query_seconds: list[float] = []
    query_seconds_no_llm: list[float] = []
    failed = 0
    for case in test_cases:
        request = replace(request_template, query_text=case.issue_text)
        started = time.perf_counter()
        try:
            response = search_relevant(graph, request, providers)
        except Exception as exc:
            log.warning("case #%s failed: %s", case.issue_id, exc)
            failed += 1
            rows.append({"issue_id": case.issue_id, "failed": str(exc)})
            continue
        elapsed = time.perf_counter() - started
        retrieved = [r.path for r in response.results]
        row = compute_row(retrieved, set(case.ground_truth), request.k, beta)
        metric_rows.append(row)
        timings = response.diagnostics.get("timings_ms", {})
        query_seconds.append(elapsed)
        query_seconds_no_llm.append(
            (timings.get("semantic", 0) + timings.get("traversal", 0) + timings.get("discovery", 0))
            / 1000.0
        )
        rows.append({"issue_id": case.issue_id, "retrieved": retrieved, **row.as_dict()})
    if not metric_rows:
        raise ValueError("every test case failed; no metrics to aggregate")
    files_total = len(graph.nodes_by_kind(NodeKind.FILE))
    k = request_template.k
    return EvalReport(
        repository=graph.node(graph.root_id).name if graph.root_id else graph.repo_url,
        languages=graph_languages(graph),
        test_cases=len(test_cases),
        failed_cases=failed,
        files_total=files_total,
        files_returned=k,
        pct_files_returned=(k / files_total) if files_total else 0.0,
        k=k,
        beta=beta,
        median_recall_at_k=median([r.recall_at_k for r in metric_rows]),
        median_precision_at_k=median([r.precision_at_k for r in metric_rows]),
        median_fbeta_at_k=median([r.fbeta_at_k for r in metric_rows]),
        percentage_found=sum(1 for r in metric_rows if r.found) / len(metric_rows),
        median_query_seconds=median(query_seconds),
        median_query_seconds_no_llm=median(query_seconds_no_llm),
        build_seconds=build_seconds,
        rows=rows,
    )


def render_report_table(reports: list[EvalReport], k: int) -> str:
    """Plain-text table with the standard top-k result columns."""
    header = [c.format(k=k) for c in REPORT_COLUMNS]
    body = [r.table_row() for r in reports]
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)


@dataclass
class AbComparison:
    label_a: str
    label_b: str
    k: int
    per_case: list[dict]
    median_delta: dict[str, float]
    median_a: dict[str, float]
    median_b: dict[str, float]

    def as_dict(self) -> dict:
        return dict(self.__dict__)

    def render(self) -> str:
        metrics = ["recall_at_k", "precision_at_k", "fbeta_at_k", "found"]
        width = max(len(m) for m in metrics) + 2
        col = max(len(self.label_a), len(self.label_b), 10) + 2
        lines = [
            "Metric".ljust(width) + self.label_a.ljust(col) + self.label_b.ljust(col) + "Delta",
        ]
        for m in metrics:
            lines.append(
                m.ljust(width)
                + f"{self.median_a[m]:.3f}".ljust(col)
                + f"{self.median_b[m]:.3f}".ljust(col)
                + f"{self.median_delta[m]:+.3f}"
            )
        return "\n".join(lines)


def ab_compare(
    graph: KnowledgeGraph,
    test_cases: list[TestCase],
    config_a: RetrievalRequest,
    config_b: RetrievalRequest,
    providers: SearchProviders,
    labels: tuple[str, str] = ("A", "B"),
    beta: float = DEFAULT_BETA,
) -> AbComparison:
    """Paired per-case metric deltas between two pipeline configurations."""
    per_case = []
    rows_a: list[MetricRow] = []
    rows_b: list[MetricRow] = []
    for case in test_cases:
        relevant = set(case.ground_truth)
        result_a = search_relevant(graph, replace(config_a, query_text=case.issue_text), providers)
        result_b = search_relevant(graph, replace(config_b, query_text=case.issue_text), providers)
        row_a = compute_row([r.path for r in result_a.results], relevant, config_a.k, beta)
        row_b = compute_row([r.path for r in result_b.results], relevant, config_b.k, beta)
        rows_a.append(row_a)
        rows_b.append(row_b)
        per_case.append(
            {
                "issue_id": case.issue_id,
                "a": row_a.as_dict(),
                "b": row_b.as_dict(),
                "delta_recall_at_k": row_b.recall_at_k - row_a.recall_at_k,
            }
        )

    def med(rows: list[MetricRow]) -> dict[str, float]:
        return {
            "recall_at_k": median([r.recall_at_k for r in rows]),
            "precision_at_k": median([r.precision_at_k for r in rows]),
            "fbeta_at_k": median([r.fbeta_at_k for r in rows]),
            "found": sum(1 for r in rows if r.found) / len(rows),
        }

    med_a, med_b = med(rows_a), med(rows_b)
    return AbComparison(
        label_a=labels[0],
        label_b=labels[1],
        k=config_a.k,
        per_case=per_case,
        median_delta={key: med_b[key] - med_a[key] for key in med_a},
        median_a=med_a,
        median_b=med_b,
    )
