"""Graph container: upsert identity, edge rules, traversal, stats, queries."""

from __future__ import annotations

import random
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from repokg.errors import QueryValidationError, SchemaError, UnknownNodeError
from repokg.graph import KnowledgeGraph
from repokg.model import EdgeKind, Node, NodeKind
from repokg.query import read_query

from conftest import add_file, add_function, make_node


class TestUpsert:
    def test_root_only_graph(self, empty_graph):
        assert len(empty_graph) == 1
        assert empty_graph.stats().nodes_by_kind["Root"] == 1

    def test_second_root_rejected(self, empty_graph):
        with pytest.raises(SchemaError):
            empty_graph.upsert_node(make_node(NodeKind.ROOT, "other"))

    def test_upsert_same_identity_replaces_fields(self, empty_graph):
        first = add_file(empty_graph, "a.py", size_bytes=10)
        node = empty_graph.node(first)
        again = make_node(NodeKind.FILE, "a.py", "a.py", size_bytes=999)
        second = empty_graph.upsert_node(again)
        assert second == first
        assert len(empty_graph) == 2
        assert empty_graph.node(first).size_bytes == 999
        assert empty_graph.node(first).last_modified >= node.last_modified

    def test_folder_cannot_carry_file_fields(self, empty_graph):
        with pytest.raises(SchemaError):
            empty_graph.upsert_node(
                Node(id="", kind=NodeKind.FOLDER, name="src", path="src", language="python")
            )

    def test_file_requires_language_and_size(self, empty_graph):
        with pytest.raises(SchemaError):
            empty_graph.upsert_node(Node(id="", kind=NodeKind.FILE, name="a.py", path="a.py"))

    def test_bad_line_span_rejected(self, empty_graph):
        with pytest.raises(SchemaError):
            empty_graph.upsert_node(
                make_node(NodeKind.FILE, "a.py", "a.py", line_span=(5, 2))
            )

    def test_ids_never_reused_after_delete(self, empty_graph):
        fid = add_file(empty_graph, "a.py")
        empty_graph.remove_node(fid)
        new_id = add_file(empty_graph, "b.py")
        assert new_id != fid


class TestEdges:
    def test_calls_between_functions_accepted(self, empty_graph):
        f = add_file(empty_graph, "a.py")
        g1 = add_function(empty_graph, "a.py", "f1", f)
        g2 = add_function(empty_graph, "a.py", "f2", f)
        empty_graph.add_edge(g1, g2, EdgeKind.CALLS)
        assert empty_graph.has_edge(g1, g2, EdgeKind.CALLS)

    def test_inherits_file_to_class_rejected(self, empty_graph):
        f = add_file(empty_graph, "a.py")
        c = add_function(empty_graph, "a.py", "C", f, kind=NodeKind.CLASS)
        with pytest.raises(SchemaError, match="Inherits"):
            empty_graph.add_edge(f, c, EdgeKind.INHERITS)

    def test_missing_endpoint_rejected(self, empty_graph):
        f = add_file(empty_graph, "a.py")
        with pytest.raises(UnknownNodeError):
            empty_graph.add_edge(f, "n999999", EdgeKind.REFERS)

    def test_duplicate_edges_collapse(self, empty_graph):
        a = add_file(empty_graph, "a.py")
        b = add_file(empty_graph, "b.py")
        empty_graph.add_edge(a, b, EdgeKind.REFERS)
        empty_graph.add_edge(a, b, EdgeKind.REFERS)
        assert empty_graph.stats().edges_by_kind["Refers"] == 1

    def test_rejected_edge_leaves_state_unchanged(self, empty_graph):
        f = add_file(empty_graph, "a.py")
        c = add_function(empty_graph, "a.py", "C", f, kind=NodeKind.CLASS)
        before = empty_graph.content_hash()
        with pytest.raises(SchemaError):
            empty_graph.add_edge(f, c, EdgeKind.INHERITS)
        assert empty_graph.content_hash() == before


def reference_bfs(nodes, edges, seeds, kinds, direction, depth):
    """Independent dict-based BFS oracle."""
    adj: dict[str, list[str]] = {n: [] for n in nodes}
    for src, dst, kind in edges:
        if kind not in kinds:
            continue
        if direction in ("outgoing", "both"):
            adj[src].append(dst)
        if direction in ("incoming", "both"):
            adj[dst].append(src)
    seen = set(seeds)
    frontier = set(seeds)
    reached = set()
    for _ in range(depth):
        nxt = set()
        for u in frontier:
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.add(v)
        reached |= nxt
        frontier = nxt
    return reached


def build_random_graph(rng: random.Random, n_nodes: int, n_edges: int):
    g = KnowledgeGraph(graph_id="grand")
    g.upsert_node(make_node(NodeKind.ROOT, "r"))
    ids = []
    for i in range(n_nodes):
        fid = add_file(g, f"f{i}.py")
        ids.append(fid)
        func = add_function(g, f"f{i}.py", f"fn{i}", fid)
        ids.append(func)
    edges = []
    attempts = 0
    while len(edges) < n_edges and attempts < n_edges * 20:
        attempts += 1
        src, dst = rng.choice(ids), rng.choice(ids)
        kind = rng.choice(list(EdgeKind))
        try:
            g.add_edge(src, dst, kind)
        except SchemaError:
            continue
        if (src, dst, kind) not in edges:
            edges.append((src, dst, kind))
    return g, ids, edges


class TestNeighbors:
    def test_isolated_node_empty(self, empty_graph):
        f = add_file(empty_graph, "a.py")
        fn = add_function(empty_graph, "a.py", "f", f)
        assert empty_graph.neighbors({fn}, {EdgeKind.CALLS}, "both", 3) == set()

    def test_single_hop_incoming(self, empty_graph):
        f = add_file(empty_graph, "a.py")
        a = add_function(empty_graph, "a.py", "a", f)
        b = add_function(empty_graph, "a.py", "b", f)
        c = add_function(empty_graph, "a.py", "c", f)
        empty_graph.add_edge(a, b, EdgeKind.CALLS)
        empty_graph.add_edge(b, c, EdgeKind.CALLS)
        assert empty_graph.neighbors({c}, {EdgeKind.CALLS}, "incoming", 1) == {b}

    def test_unknown_seed_names_id(self, empty_graph):
        with pytest.raises(UnknownNodeError, match="n42"):
            empty_graph.neighbors({"n42"}, None, "outgoing", 1)

    def test_matches_reference_bfs(self):
        rng = random.Random(7)
        for trial in range(20):
            g, ids, _ = build_random_graph(rng, 10, 25)
            all_ids = g.node_ids()
            all_edges = [(e.src, e.dst, e.kind) for e in g.edges()]
            seeds = set(rng.sample(ids, k=min(2, len(ids))))
            for direction in ("outgoing", "incoming", "both"):
                for depth in (1, 2, 3, 4):
                    kinds = set(rng.sample(list(EdgeKind), k=rng.randint(1, 6)))
                    expected = reference_bfs(all_ids, all_edges, seeds, kinds, direction, depth)
                    got = g.neighbors(seeds, kinds, direction, depth)
                    assert got == expected


class TestStats:
    def test_poetry_shaped_counts_on_small_fixture(self, empty_graph):
        src = empty_graph.upsert_node(make_node(NodeKind.FOLDER, "src", "src"))
        empty_graph.add_edge(empty_graph.root_id, src, EdgeKind.CONTAINS)
        add_file(empty_graph, "src/a.py", parent=src)
        add_file(empty_graph, "src/b.py", parent=src)
        add_file(empty_graph, "README.md", language="markdown")
        add_file(empty_graph, "logo.png", language="binary")
        stats = empty_graph.stats()
        assert stats.nodes_by_kind == {
            "Root": 1, "Folder": 1, "File": 4, "Class": 0, "Function": 0, "MemberFunction": 0,
        }
        assert stats.total_nodes == 6
        assert stats.edges_by_kind["Contains"] == 5
        assert stats.file_types == {"source": 2, "documentation": 1, "other": 1}

    def test_totals_match_recount(self):
        rng = random.Random(3)
        g, ids, edges = build_random_graph(rng, 8, 18)
        stats = g.stats()
        assert stats.total_nodes == len(g.nodes())
        assert stats.total_edges == len(g.edges())
        assert stats.total_nodes == sum(stats.nodes_by_kind.values())
        assert stats.total_edges == sum(stats.edges_by_kind.values())


class TestReadQuery:
    def test_node_by_path(self, empty_graph):
        fid = add_file(empty_graph, "src/x.py", parent=None)
        result = read_query(empty_graph, {"op": "node_by_path", "path": "src/x.py"})
        assert result["node"]["id"] == fid
        assert result["node"]["path"] == "src/x.py"

    def test_nodes_by_kind_root(self, empty_graph):
        result = read_query(empty_graph, {"op": "nodes_by_kind", "kind": "Root"})
        assert len(result["nodes"]) == 1

    def test_subgraph_equals_filter_oracle(self, empty_graph):
        a = add_file(empty_graph, "a.py")
        b = add_file(empty_graph, "b.py")
        c = add_file(empty_graph, "c.py")
        empty_graph.add_edge(a, b, EdgeKind.REFERS)
        empty_graph.add_edge(b, c, EdgeKind.REFERS)
        result = read_query(empty_graph, {"op": "subgraph", "nodes": [a, b]})
        expected = [
            (e.src, e.dst) for e in empty_graph.edges() if e.src in {a, b} and e.dst in {a, b}
        ]
        assert [(e["src"], e["dst"]) for e in result["edges"]] == sorted(expected)

    def test_malformed_request_lists_allowed_forms(self, empty_graph):
        with pytest.raises(QueryValidationError, match="node_by_path"):
            read_query(empty_graph, {"op": "drop_table"})

    def test_read_query_never_mutates(self, empty_graph):
        a = add_file(empty_graph, "a.py")
        before = empty_graph.content_hash()
        read_query(empty_graph, {"op": "stats"})
        read_query(empty_graph, {"op": "node_by_path", "path": "a.py"})
        read_query(empty_graph, {"op": "neighbors", "seeds": [a], "depth": 2})
        assert empty_graph.content_hash() == before


@st.composite
def graph_ops(draw):
    ops = draw(
        st.lists(
            st.tuples(
                st.sampled_from(["file", "fn", "edge"]),
                st.integers(0, 5),
                st.integers(0, 5),
                st.sampled_from(list(EdgeKind)),
            ),
            max_size=30,
        )
    )
    return ops


@given(graph_ops())
@settings(max_examples=60, deadline=None)
def test_schema_holds_under_random_op_sequences(ops):
    g = KnowledgeGraph(graph_id="gprop")
    g.upsert_node(make_node(NodeKind.ROOT, "r"))
    files: list[str] = []
    fns: list[str] = []
    for op, i, j, kind in ops:
        if op == "file":
            files.append(add_file(g, f"f{len(files)}.py"))
        elif op == "fn" and files:
            fid = files[i % len(files)]
            path = g.node(fid).path
            fns.append(add_function(g, path, f"fn{len(fns)}", fid))
        elif op == "edge" and files and fns:
            pool = files + fns
            src, dst = pool[i % len(pool)], pool[j % len(pool)]
            try:
                g.add_edge(src, dst, kind)
            except SchemaError:
                pass
    from repokg.model import EDGE_ENDPOINT_RULES

    for edge in g.edges():
        pair = (g.node(edge.src).kind, g.node(edge.dst).kind)
        assert pair in EDGE_ENDPOINT_RULES[edge.kind]
    assert g.validate() == []
