"""Command-line entry points: build, update, search, cluster, eval, stats, serve.

Exit codes: 0 success, 1 usage error, 2 operational failure. ``--json`` emits
machine-readable output on stdout; errors always go to stderr.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from .cluster import (
    SemanticClusterParams,
    file_graph_view,
    label_clusters,
    label_propagation,
    louvain,
    misc_group,
    semantic_cluster_graph,
)
from .enrich import EnrichmentCache
from .errors import RepoKgError
from .evaluation import load_cases, ab_compare, render_report_table, run_eval
from .retrieval import PreprocessMode, RetrievalRequest, search_relevant
from .service import ServiceConfig, create_app
from .snapshot import load_snapshot, save_snapshot
from .workflows import build_pipeline, update_pipeline

MODE_NAMES = {m.value: m for m in PreprocessMode}


@click.group()
def cli():
    """Repository knowledge graphs with semantic file retrieval."""


def _providers_for(config: ServiceConfig, no_llm: bool):
    if no_llm:
        config = replace(config, summarizer_url=None, embedder_url=None)
    return config


def _echo_stats(stats: dict) -> None:
    click.echo("nodes:")
    for kind, count in stats["nodes_by_kind"].items():
        click.echo(f"  {kind:16} {count}")
    click.echo("edges:")
    for kind, count in stats["edges_by_kind"].items():
        click.echo(f"  {kind:16} {count}")
    click.echo(f"total nodes: {stats['total_nodes']}  total edges: {stats['total_edges']}")
    ft = stats["file_types"]
    click.echo(f"file types: source={ft['source']} documentation={ft['documentation']} other={ft['other']}")


@cli.command()
@click.option("--repo", "repo_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--rev", "revision", default="", help="Commit to pin the graph to (default: HEAD).")
@click.option("--out", "out_path", default="graph.json", type=click.Path(dir_okay=False))
@click.option("--dim", default=256, show_default=True, help="Embedding dim for the stub embedder.")
@click.option("--no-llm", is_flag=True, help="Force deterministic stub providers.")
@click.option("--no-enrich", is_flag=True, help="Skip summarization/embedding entirely.")
@click.option("--cache", "cache_path", default=None, type=click.Path(dir_okay=False),
              help="sqlite enrichment cache file.")
@click.option("--json", "as_json", is_flag=True)
def build(repo_path, revision, out_path, dim, no_llm, no_enrich, cache_path, as_json):
    """Build a knowledge graph snapshot from a repository checkout."""
    config = _providers_for(ServiceConfig(stub_dim=dim), no_llm)
    cache = EnrichmentCache(cache_path) if cache_path else None
    summarizer = None if no_enrich else config.make_summarizer()
    embedder = None if no_enrich else config.make_embedder()
    graph, seconds = build_pipeline(repo_path, revision, summarizer, embedder, cache=cache)
    save_snapshot(graph, out_path)
    stats = graph.stats().as_dict()
    payload = {
        "graph_id": graph.graph_id,
        "revision": graph.revision,
        "snapshot": str(out_path),
        "build_seconds": round(seconds, 3),
        "stats": stats,
        "diagnostics": {k: v for k, v in graph.diagnostics.items() if k != "enrichment_failures"},
    }
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(f"graph {graph.graph_id} at {graph.revision or '(unversioned)'} "
                   f"written to {out_path} in {seconds:.2f}s")
        _echo_stats(stats)


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--repo", "repo_path", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--rev", "revision", required=True, help="New revision (same branch).")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Output snapshot (default: overwrite input).")
@click.option("--no-llm", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def update(graph_path, repo_path, revision, out_path, no_llm, as_json):
    """Apply commits since the graph's revision and refresh stale enrichment."""
    config = _providers_for(ServiceConfig(), no_llm)
    graph = load_snapshot(graph_path)
    if graph.embedding_dim:
        config = replace(config, stub_dim=graph.embedding_dim)
    graph, seconds = update_pipeline(
        graph, repo_path, revision, config.make_summarizer(), config.make_embedder()
    )
    save_snapshot(graph, out_path or graph_path)
    payload = {
        "graph_id": graph.graph_id,
        "revision": graph.revision,
        "update_seconds": round(seconds, 3),
        "stats": graph.stats().as_dict(),
    }
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(f"updated to {graph.revision} in {seconds:.2f}s")
        _echo_stats(payload["stats"])


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--query", required=True)
@click.option("--k", default=50, show_default=True)
@click.option("--mode", default="none", type=click.Choice(sorted(MODE_NAMES)), show_default=True)
@click.option("--budget", "budget_fraction", default=None, type=float,
              help="Candidate budget as a fraction of repository files.")
@click.option("--no-llm", is_flag=True, help="Stub providers only (mode forced to none).")
@click.option("--no-discovery", is_flag=True)
@click.option("--no-traversal", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def search(graph_path, query, k, mode, budget_fraction, no_llm, no_discovery, no_traversal, as_json):
    """Rank repository files likely to change for a natural-language query."""
    config = _providers_for(ServiceConfig(), no_llm)
    graph = load_snapshot(graph_path)
    if graph.embedding_dim:
        config = replace(config, stub_dim=graph.embedding_dim)
    request = RetrievalRequest(
        query_text=query,
        mode=PreprocessMode.NONE if no_llm else MODE_NAMES[mode],
        k=k,
        budget_fraction=budget_fraction,
        enable_discovery=not no_discovery,
        enable_traversal=not no_traversal,
    )
    response = search_relevant(graph, request, config.search_providers())
    if as_json:
        click.echo(json.dumps(response.to_json(), indent=2))
    else:
        for result in response.results:
            score = "-" if result.score is None else f"{result.score:.4f}"
            click.echo(f"{result.rank:>3}  {score:>8}  {','.join(result.provenance):<28} {result.path}")
        if not response.results:
            click.echo("no results")


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def stats(graph_path, as_json):
    """Node/edge/file-type statistics of a snapshot."""
    graph = load_snapshot(graph_path)
    payload = graph.stats().as_dict()
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(f"graph {graph.graph_id} at {graph.revision or '(unversioned)'}")
        _echo_stats(payload)


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", default="louvain",
              type=click.Choice(["louvain", "labelprop", "semantic"]), show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--min-size", default=3, show_default=True, help="Clusters below this go to misc.")
@click.option("--json", "as_json", is_flag=True)
def cluster(graph_path, method, seed, min_size, as_json):
    """Group repository files by structure or embedding similarity."""
    graph = load_snapshot(graph_path)
    if method == "louvain":
        assignment = louvain(file_graph_view(graph))
    elif method == "labelprop":
        assignment = label_propagation(file_graph_view(graph), seed=seed)
    else:
        assignment = semantic_cluster_graph(graph, SemanticClusterParams(seed=seed))
    assignment = label_clusters(misc_group(assignment, min_size), graph)
    doc = assignment.to_json()
    if as_json:
        click.echo(json.dumps(doc, indent=2))
    else:
        quality = doc["quality"]
        click.echo(f"{doc['method']} -> {quality['count']} clusters "
                   f"(sizes {quality['sizes']}, unassigned {quality['unassigned']})")
        for entry in doc["clusters"]:
            click.echo(f"  [{entry['id']:>3}] {entry['label'] or '-'}: {len(entry['files'])} files")


@cli.command(name="eval")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--cases", "cases_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", default=50, show_default=True)
@click.option("--beta", default=3.0, show_default=True)
@click.option("--mode", default="none", type=click.Choice(sorted(MODE_NAMES)), show_default=True)
@click.option("--no-llm", is_flag=True)
@click.option("--ab", "ab_stage", default=None, type=click.Choice(["discovery", "traversal"]),
              help="Compare the pipeline with and without one stage.")
@click.option("--json", "as_json", is_flag=True)
def eval_cmd(graph_path, cases_path, k, beta, mode, no_llm, ab_stage, as_json):
    """Evaluate issue->files retrieval against recorded test cases."""
    config = _providers_for(ServiceConfig(), no_llm)
    graph = load_snapshot(graph_path)
    if graph.embedding_dim:
        config = replace(config, stub_dim=graph.embedding_dim)
    cases = load_cases(cases_path)
    providers = config.search_providers()
    template = RetrievalRequest(
        query_text="-", mode=PreprocessMode.NONE if no_llm else MODE_NAMES[mode], k=k
    )
    if ab_stage:
        if ab_stage == "discovery":
            config_a = replace(template, enable_discovery=False)
            config_b = replace(template, enable_discovery=True)
        else:
            config_a = replace(template, enable_traversal=False)
            config_b = replace(template, enable_traversal=True)
        comparison = ab_compare(graph, cases, config_a, config_b, providers,
                                labels=(f"without-{ab_stage}", f"with-{ab_stage}"), beta=beta)
        click.echo(json.dumps(comparison.as_dict(), indent=2) if as_json else comparison.render())
        return
    report = run_eval(graph, cases, template, providers, beta=beta)
    if as_json:
        click.echo(json.dumps(report.as_dict(), indent=2))
    else:
        click.echo(render_report_table([report], k=k))
        click.echo(f"\npercentage found: {report.percentage_found:.1%}   "
                   f"median query: {report.median_query_seconds:.3f}s "
                   f"(no-LLM stages: {report.median_query_seconds_no_llm:.3f}s)")


@cli.command()
@click.option("--store", "store_dir", default="graphs", type=click.Path(file_okay=False),
              show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--dim", default=256, show_default=True)
def serve(store_dir, host, port, dim):
    """Run the HTTP service over a graph store directory."""
    import uvicorn

    app = create_app(ServiceConfig(store_dir=Path(store_dir), stub_dim=dim))
    uvicorn.run(app, host=host, port=port, log_level="info")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except RepoKgError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
