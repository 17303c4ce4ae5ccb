"""Cosine formula, preprocessing modes, search exactness, expansion, discovery,
and full-pipeline ordering rules."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from repokg.enrich import StubEmbedder, StubQueryPreprocessor, StubSummarizer, enrich_graph
from repokg.errors import DimensionMismatchError, ProviderError
from repokg.graph import KnowledgeGraph
from repokg.model import EdgeKind, Node, NodeKind
from repokg.retrieval import (
    CONCAT_SEPARATOR,
    PreprocessMode,
    RetrievalRequest,
    SearchProviders,
    TraversalConfig,
    cosine_similarity,
    discover_mentioned_files,
    preprocess_query,
    search_relevant,
    semantic_search,
    traverse_expand,
)
from repokg.vectors import as_unit_f32

from conftest import add_file, add_function, make_node


def formula_oracle(a, b) -> float:
    num = sum(x * y for x, y in zip(a, b))
    return num / (math.sqrt(sum(x * x for x in a)) * math.sqrt(sum(y * y for y in b)))


class TestCosine:
    def test_identity(self):
        v = as_unit_f32([1.0, 2.0, 2.0])
        assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal(self):
        assert cosine_similarity([1, 0, 0], [0, 1, 0]) == pytest.approx(0.0, abs=1e-9)

    def test_formula_value(self):
        # direct evaluation: 32 / (sqrt(14) * sqrt(77))
        assert cosine_similarity([1, 2, 3], [4, 5, 6]) == pytest.approx(0.974631846, abs=1e-9)

    def test_random_pairs_match_oracle(self):
        rng = random.Random(0)
        for _ in range(200):
            dim = rng.randint(2, 32)
            a = [rng.uniform(-1, 1) or 0.5 for _ in range(dim)]
            b = [rng.uniform(-1, 1) or 0.5 for _ in range(dim)]
            assert cosine_similarity(a, b) == pytest.approx(formula_oracle(a, b), abs=1e-9)

    def test_symmetry_and_scale_invariance(self):
        rng = random.Random(1)
        a = [rng.uniform(-1, 1) + 0.1 for _ in range(16)]
        b = [rng.uniform(-1, 1) + 0.1 for _ in range(16)]
        assert cosine_similarity(a, b) == pytest.approx(cosine_similarity(b, a), abs=1e-12)
        for alpha in (1e-6, 1.0, 1e6):
            scaled = [alpha * x for x in a]
            assert cosine_similarity(scaled, b) == pytest.approx(
                cosine_similarity(a, b), abs=1e-9
            )

    def test_errors(self):
        with pytest.raises(DimensionMismatchError):
            cosine_similarity([1, 2], [1, 2, 3])
        with pytest.raises(ValueError):
            cosine_similarity([0, 0], [1, 1])


class TestPreprocess:
    def test_mode_none(self, embedder):
        bundle = preprocess_query("fix crash in init", PreprocessMode.NONE, None, embedder)
        assert bundle.texts == [("raw", "fix crash in init")]
        assert len(bundle.embeddings) == 1

    def test_mode_concat_with_stub_echo(self, embedder):
        bundle = preprocess_query(
            "fix crash in init", PreprocessMode.CONCAT_LLM, StubQueryPreprocessor(), embedder
        )
        assert bundle.texts == [
            ("concat", "NORMALIZED:fix crash in init" + CONCAT_SEPARATOR + "fix crash in init")
        ]

    def test_mode_selective_two_embeddings(self, embedder):
        bundle = preprocess_query(
            "fix crash in init", PreprocessMode.SELECTIVE_LLM, StubQueryPreprocessor(), embedder
        )
        assert len(bundle.embeddings) == 2
        assert bundle.preprocessed_text == "NORMALIZED:fix crash in init"

    def test_provider_failure_falls_back_with_warning(self, embedder):
        class Broken:
            identity = "broken"

            def preprocess(self, query):
                raise ProviderError("down")

        bundle = preprocess_query("q text", PreprocessMode.LLM, Broken(), embedder)
        assert bundle.texts == [("raw", "q text")]
        assert bundle.warnings

    def test_empty_query_rejected(self, embedder):
        with pytest.raises(ValueError):
            preprocess_query("  ", PreprocessMode.NONE, None, embedder)


def planted_graph(dim=8, n_files=6):
    """Graph with hand-set unit embeddings on every file."""
    g = KnowledgeGraph(graph_id="gsearch", embedding_dim=dim)
    g.upsert_node(make_node(NodeKind.ROOT, "r"))
    rng = np.random.default_rng(42)
    for i in range(n_files):
        vec = as_unit_f32(rng.random(dim) + 0.05)
        add_file(g, f"src/f{i}.py", description=f"file {i}", description_embedding=vec,
                 raw_content=f"# {i}")
    return g


class _Bundle:
    def __init__(self, *vecs):
        self.embeddings = [np.asarray(v, dtype=np.float32) for v in vecs]
        self.warnings = []
        self.raw_text = "x"


class TestSemanticSearch:
    def test_exact_match_ranks_first(self):
        g = planted_graph()
        target = g.node_by_path("src/f3.py")
        hits = semantic_search(g, _Bundle(target.description_embedding), limit=3)
        assert hits[0].node == target.id
        assert hits[0].score == pytest.approx(1.0, abs=1e-6)
        assert hits[0].rank == 1

    def test_matches_brute_force_scan(self):
        g = planted_graph(dim=16, n_files=40)
        rng = np.random.default_rng(9)
        query = as_unit_f32(rng.random(16) + 0.01)
        hits = semantic_search(g, _Bundle(query), limit=40)
        brute = []
        for node in g.nodes_by_kind(NodeKind.FILE):
            brute.append((float(np.dot(node.description_embedding.astype(np.float64),
                                       query.astype(np.float64))), node.path, node.id))
        brute.sort(key=lambda t: (-t[0], t[1], t[2]))
        assert [h.node for h in hits] == [b[2] for b in brute]
        for hit, b in zip(hits, brute):
            assert hit.score == pytest.approx(b[0], abs=1e-12)

    def test_selective_max_fusion(self):
        g = planted_graph(dim=8, n_files=5)
        x = g.node_by_path("src/f0.py")
        y = g.node_by_path("src/f4.py")
        hits = semantic_search(
            g, _Bundle(x.description_embedding, y.description_embedding), limit=5
        )
        assert {hits[0].node, hits[1].node} == {x.id, y.id}
        assert hits[0].score == pytest.approx(1.0, abs=1e-6)
        assert hits[1].score == pytest.approx(1.0, abs=1e-6)

    def test_ranks_have_no_gaps_and_scores_non_increasing(self):
        g = planted_graph(dim=8, n_files=12)
        hits = semantic_search(g, _Bundle(as_unit_f32(np.ones(8))), limit=12)
        assert [h.rank for h in hits] == list(range(1, len(hits) + 1))
        assert all(a.score >= b.score for a, b in zip(hits, hits[1:]))


def two_function_fixture():
    g = KnowledgeGraph(graph_id="gtrav", embedding_dim=4)
    g.upsert_node(make_node(NodeKind.ROOT, "r"))
    fa = add_file(g, "a.py", raw_content="...")
    fb = add_file(g, "b.py", raw_content="...")
    f1 = add_function(g, "a.py", "f1", fa)
    f2 = add_function(g, "b.py", "f2", fb)
    g.add_edge(f2, f1, EdgeKind.CALLS)
    return g, fa, fb, f1, f2


class TestTraverseExpand:
    def test_file_hit_expands_nothing_by_default(self):
        g, fa, fb, f1, f2 = two_function_fixture()
        assert traverse_expand(g, [fa]) == set()

    def test_caller_and_files_added(self):
        g, fa, fb, f1, f2 = two_function_fixture()
        assert traverse_expand(g, [f1]) == {f2, fa, fb}

    def test_excludes_seed_hits(self):
        g, fa, fb, f1, f2 = two_function_fixture()
        assert f1 not in traverse_expand(g, [f1, f2])

    def test_general_config_matches_neighbors(self):
        g, fa, fb, f1, f2 = two_function_fixture()
        config = TraversalConfig(edge_kinds={EdgeKind.CALLS}, direction="both", depth=2)
        got = traverse_expand(g, [f1], config)
        expected = g.neighbors({f1}, {EdgeKind.CALLS}, "both", 2)
        assert got == expected


class TestDiscovery:
    def test_verbatim_path_found(self):
        g = planted_graph()
        target = g.node_by_path("src/f2.py")
        found = discover_mentioned_files("crash seen in src/f2.py today", g)
        assert found == {target.id}

    def test_no_pathlike_tokens(self):
        g = planted_graph()
        assert discover_mentioned_files("nothing path like here", g) == set()

    def test_traceback_reference_suffix_match(self):
        g = planted_graph()
        target = g.node_by_path("src/f1.py")
        query = 'Traceback:\n  File "/build/area/src/f1.py", line 12, in run\n    boom()'
        assert discover_mentioned_files(query, g) == {target.id}

    def test_suggester_filtered_to_existing(self):
        g = planted_graph()

        class Suggester:
            def suggest_paths(self, query):
                return ["src/f0.py", "not/a/file.py"]

        found = discover_mentioned_files("anything", g, Suggester())
        assert found == {g.node_by_path("src/f0.py").id}


def pipeline_fixture():
    """Enriched mini-repo graph with a call chain and distinctive texts."""
    g = KnowledgeGraph(graph_id="gpipe")
    g.upsert_node(make_node(NodeKind.ROOT, "demo"))
    files = {
        "src/app/new.py": "def create_project(name):\n    return scaffold(name)\n",
        "src/app/init.py": "def scaffold(name):\n    return name\n",
        "src/app/other.py": "def unrelated():\n    return 0\n",
    }
    ids = {}
    for path, content in files.items():
        ids[path] = add_file(g, path, raw_content=content,
                             docstring={"src/app/new.py": "Create new project scaffolding.",
                                        "src/app/init.py": "Initialise project layout.",
                                        "src/app/other.py": "Completely different concern."}[path])
    create = add_function(g, "src/app/new.py", "create_project", ids["src/app/new.py"],
                          raw_content=files["src/app/new.py"],
                          docstring="Create new project scaffolding.")
    scaffold = add_function(g, "src/app/init.py", "scaffold", ids["src/app/init.py"],
                            raw_content=files["src/app/init.py"],
                            docstring="Initialise and scaffold the project layout.")
    add_function(g, "src/app/other.py", "unrelated", ids["src/app/other.py"],
                 raw_content=files["src/app/other.py"], docstring="Unrelated helper.")
    g.add_edge(create, scaffold, EdgeKind.CALLS)
    enrich_graph(g, StubSummarizer(), StubEmbedder(dim=64, seed=0), scope="all")
    return g, ids


class TestSearchRelevant:
    def providers(self):
        return SearchProviders(embedder=StubEmbedder(dim=64, seed=0))

    def test_single_matching_file(self):
        g, ids = pipeline_fixture()
        request = RetrievalRequest(query_text="initialise scaffold the project layout", k=1,
                                   enable_discovery=False, enable_traversal=False)
        response = search_relevant(g, request, self.providers())
        assert len(response.results) == 1
        assert response.results[0].path == "src/app/init.py"
        assert response.results[0].provenance == ["semantic"]

    def test_traversal_pulls_in_caller_file(self):
        g, ids = pipeline_fixture()
        # budget limits candidates to the single best node (the scaffold
        # function), so its caller can only arrive via traversal
        request = RetrievalRequest(query_text="scaffold", k=3, enable_discovery=False,
                                   budget_fraction=0.34)
        response = search_relevant(g, request, self.providers())
        paths = [r.path for r in response.results]
        assert "src/app/new.py" in paths
        new_result = next(r for r in response.results if r.path == "src/app/new.py")
        assert new_result.provenance == ["traversal"]
        baseline = RetrievalRequest(query_text="scaffold", k=3, enable_discovery=False,
                                    budget_fraction=0.34, enable_traversal=False)
        base_paths = [r.path for r in search_relevant(g, baseline, self.providers()).results]
        assert "src/app/new.py" not in base_paths

    def test_discovery_hit_ranks_first(self):
        g, ids = pipeline_fixture()
        request = RetrievalRequest(
            query_text="totally unrelated words but mentions src/app/other.py verbatim",
            k=3,
        )
        response = search_relevant(g, request, self.providers())
        assert response.results[0].path == "src/app/other.py"
        assert "discovery" in response.results[0].provenance
        assert response.results[0].rank == 1

    def test_deterministic_byte_identical(self):
        g, ids = pipeline_fixture()
        request = RetrievalRequest(query_text="scaffold project", k=3)
        a = search_relevant(g, request, self.providers()).to_json()["results"]
        b = search_relevant(g, request, self.providers()).to_json()["results"]
        assert a == b

    def test_no_duplicates_and_k_respected(self):
        g, ids = pipeline_fixture()
        request = RetrievalRequest(query_text="project", k=2)
        response = search_relevant(g, request, self.providers())
        paths = [r.path for r in response.results]
        assert len(paths) == len(set(paths)) <= 2

    def test_discovery_only_adds_or_promotes(self):
        g, ids = pipeline_fixture()
        base = RetrievalRequest(query_text="scaffold plus src/app/other.py", k=3,
                                enable_discovery=False)
        with_disc = RetrievalRequest(query_text="scaffold plus src/app/other.py", k=3,
                                     enable_discovery=True)
        r_base = search_relevant(g, base, self.providers())
        r_disc = search_relevant(g, with_disc, self.providers())
        base_ranks = {r.path: r.rank for r in r_base.results}
        disc_ranks = {r.path: r.rank for r in r_disc.results}
        assert set(base_ranks) <= set(disc_ranks)
        assert disc_ranks["src/app/other.py"] <= base_ranks.get("src/app/other.py", 99)

    def test_budget_fraction_controls_candidates(self):
        g, ids = pipeline_fixture()
        request = RetrievalRequest(query_text="project", k=3, budget_fraction=0.34,
                                   enable_traversal=False, enable_discovery=False)
        response = search_relevant(g, request, self.providers())
        assert len(response.results) <= 1  # 34% of 3 files -> 1 candidate node

    def test_timings_reported(self):
        g, ids = pipeline_fixture()
        request = RetrievalRequest(query_text="project", k=2)
        response = search_relevant(g, request, self.providers())
        assert set(response.diagnostics["timings_ms"]) == {
            "preprocess", "semantic", "traversal", "discovery",
        }
