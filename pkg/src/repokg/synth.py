"""Deterministic synthetic graphs for tests and benchmarks.

``poetry_shaped_graph`` reproduces the per-kind node and edge counts of the
Poetry reference statistics, including the console-command files from the
case study, with all graph invariants intact. ``scaled_graph`` produces a
repository graph of arbitrary node/edge scale with seeded unit embeddings for
latency and benchmark runs.
"""

from __future__ import annotations

import numpy as np

from .graph import KnowledgeGraph
from .ingest.builder import link_tests
from .model import EdgeKind, Node, NodeKind
from .vectors import as_unit_f32

POETRY_NODE_COUNTS = {
    "Root": 1,
    "Folder": 280,
    "File": 763,
    "Class": 228,
    "Function": 1016,
    "MemberFunction": 967,
}

# Implements from the reference table; Contains derives from the tree (1043)
# plus the 10 entities deliberately attached via Contains instead.
POETRY_EDGE_COUNTS = {
    "Contains": 1053,
    "Implements": 2201,
    "Refers": 995,
    "Inherits": 104,
    "Tests": 712,
    "Calls": 0,
}

CASE_STUDY_FILES = [
    "src/poetry/console/commands/new.py",
    "src/poetry/console/commands/init.py",
    "tests/console/commands/test_new.py",
    "tests/console/commands/test_init.py",
]

GEN_PAIRS = 170         # test file <-> source file pairs
TESTED_METHODS = 540    # method-level test links across the pairs
DOC_FILES = 300
OTHER_FILES = 100


def _file(graph: KnowledgeGraph, path: str, parent: str, language: str, content: str | None):
    node = Node(
        id="",
        kind=NodeKind.FILE,
        name=path.rsplit("/", 1)[-1],
        path=path,
        language=language,
        size_bytes=len(content or ""),
        raw_content=content,
    )
    nid = graph.upsert_node(node)
    graph.add_edge(parent, nid, EdgeKind.CONTAINS)
    return nid


def _folder(graph: KnowledgeGraph, path: str, parent: str) -> str:
    node = Node(id="", kind=NodeKind.FOLDER, name=path.rsplit("/", 1)[-1], path=path)
    nid = graph.upsert_node(node)
    graph.add_edge(parent, nid, EdgeKind.CONTAINS)
    return nid


def _entity(graph, kind, path, qual, parent_id, edge=EdgeKind.IMPLEMENTS, **kwargs):
    node = Node(
        id="",
        kind=kind,
        name=qual.rsplit(".", 1)[-1],
        path=path,
        qualified_name=qual,
        parent_id=parent_id,
        raw_content=kwargs.pop("raw_content", f"def {qual}: ..."),
        **kwargs,
    )
    nid = graph.upsert_node(node)
    graph.add_edge(parent_id, nid, edge)
    return nid


def poetry_shaped_graph() -> KnowledgeGraph:
    g = KnowledgeGraph(graph_id="gpoetry", repo_url="fixture://poetry",
                       revision="a622badfe8b2f9223c5d1d93f11d89e9cf67d877")
    root = g.upsert_node(Node(id="", kind=NodeKind.ROOT, name="poetry", path="",
                              raw_content="Repository poetry.\nLanguages: python."))

    folders: dict[str, str] = {}

    def folder(path: str) -> str:
        if path in folders:
            return folders[path]
        parent = root if "/" not in path else folder(path.rsplit("/", 1)[0])
        folders[path] = _folder(g, path, parent)
        return folders[path]

    for fixed in ("src", "src/poetry", "src/poetry/console", "src/poetry/console/commands",
                  "src/poetry/gen", "tests", "tests/console", "tests/console/commands",
                  "tests/gen", "docs", "assets"):
        folder(fixed)
    filler_folders = POETRY_NODE_COUNTS["Folder"] - len(folders)
    for i in range(filler_folders):
        folder(f"src/poetry/pkg{i:03d}")

    class_ids: list[str] = []
    function_budget = POETRY_NODE_COUNTS["Function"]
    functions_made = 0
    files_made = 0

    # case-study command files with their classes and handle() methods
    for path, cls in (("src/poetry/console/commands/new.py", "NewCommand"),
                      ("src/poetry/console/commands/init.py", "InitCommand")):
        fid = _file(g, path, folders["src/poetry/console/commands"], "python",
                    f"class {cls}: ...")
        files_made += 1
        cid = _entity(g, NodeKind.CLASS, path, cls, fid,
                      docstring=f"{cls} console command.")
        class_ids.append(cid)
        _entity(g, NodeKind.MEMBER_FUNCTION, path, f"{cls}.handle", cid, signature="(self)")
    for path in ("tests/console/commands/test_new.py", "tests/console/commands/test_init.py"):
        _file(g, path, folders["tests/console/commands"], "python", "# tests")
        files_made += 1

    # generated pairs: source module with a class of tested methods + its test file
    methods_left = TESTED_METHODS
    source_file_ids: list[str] = []
    for i in range(GEN_PAIRS):
        per_pair = min(methods_left, 4 if i < TESTED_METHODS - GEN_PAIRS * 3 else 3)
        methods_left -= per_pair
        src_path = f"src/poetry/gen/mod{i:03d}.py"
        test_path = f"tests/gen/test_mod{i:03d}.py"
        src_id = _file(g, src_path, folders["src/poetry/gen"], "python", f"# module {i}")
        source_file_ids.append(src_id)
        files_made += 1
        cls_id = _entity(g, NodeKind.CLASS, src_path, f"Mod{i:03d}", src_id)
        class_ids.append(cls_id)
        for j in range(per_pair):
            _entity(g, NodeKind.MEMBER_FUNCTION, src_path, f"Mod{i:03d}.m{i:03d}_{j}", cls_id,
                    signature="(self)")
        test_id = _file(g, test_path, folders["tests/gen"], "python", f"# tests for module {i}")
        files_made += 1
        for j in range(per_pair):
            _entity(g, NodeKind.FUNCTION, test_path, f"test_m{i:03d}_{j}", test_id,
                    signature="()")
            functions_made += 1
    assert methods_left == 0

    # filler source files with the remaining classes, methods, and functions
    remaining_source = (
        POETRY_NODE_COUNTS["File"] - DOC_FILES - OTHER_FILES - files_made
    )
    filler_file_ids = []
    filler_parents = sorted(folders)
    for i in range(remaining_source):
        parent = folders[f"src/poetry/pkg{i % filler_folders:03d}"]
        fid = _file(g, f"src/poetry/pkg{i % filler_folders:03d}/extra{i:03d}.py", parent,
                    "python", f"# extra {i}")
        filler_file_ids.append(fid)
        files_made += 1
    for i in range(DOC_FILES):
        _file(g, f"docs/doc{i:03d}.md", folders["docs"], "markdown", f"# doc {i}")
        files_made += 1
    for i in range(OTHER_FILES):
        _file(g, f"assets/cfg{i:03d}.ini", folders["assets"], "text", f"k={i}")
        files_made += 1
    assert files_made == POETRY_NODE_COUNTS["File"], files_made

    while len(class_ids) < POETRY_NODE_COUNTS["Class"]:
        i = len(class_ids)
        host = filler_file_ids[i % len(filler_file_ids)]
        host_path = g.node(host).path
        class_ids.append(_entity(g, NodeKind.CLASS, host_path, f"Extra{i:03d}", host))

    mf_count = len(g.nodes_by_kind(NodeKind.MEMBER_FUNCTION))
    k = 0
    while mf_count < POETRY_NODE_COUNTS["MemberFunction"]:
        cid = class_ids[k % len(class_ids)]
        owner = g.node(cid)
        _entity(g, NodeKind.MEMBER_FUNCTION, owner.path, f"{owner.qualified_name}.u{k:04d}", cid,
                signature="(self)")
        mf_count += 1
        k += 1

    # free functions; ten of them attach through Contains instead of Implements
    free_needed = function_budget - functions_made
    hosts = filler_file_ids + source_file_ids
    for i in range(free_needed):
        host = hosts[i % len(hosts)]
        edge = EdgeKind.CONTAINS if i < 10 else EdgeKind.IMPLEMENTS
        _entity(g, NodeKind.FUNCTION, g.node(host).path, f"fn{i:04d}", host, edge=edge,
                signature="()")
        functions_made += 1

    # Refers: ring plus stride links over source files until the budget is met
    file_ids = [n.id for n in sorted(g.nodes_by_kind(NodeKind.FILE), key=lambda n: n.path)
                if n.language == "python"]
    refers = 0
    stride = 1
    while refers < POETRY_EDGE_COUNTS["Refers"]:
        for i in range(len(file_ids)):
            if refers >= POETRY_EDGE_COUNTS["Refers"]:
                break
            j = (i + stride) % len(file_ids)
            if i == j:
                continue
            if not g.has_edge(file_ids[i], file_ids[j], EdgeKind.REFERS):
                g.add_edge(file_ids[i], file_ids[j], EdgeKind.REFERS)
                refers += 1
        stride += 1

    for i in range(POETRY_EDGE_COUNTS["Inherits"]):
        g.add_edge(class_ids[i % len(class_ids)], class_ids[(i + 7) % len(class_ids)],
                   EdgeKind.INHERITS)

    link_tests(g)
    stats = g.stats()
    assert stats.nodes_by_kind == POETRY_NODE_COUNTS, stats.nodes_by_kind
    assert stats.edges_by_kind == POETRY_EDGE_COUNTS, stats.edges_by_kind
    return g


def scaled_graph(
    n_nodes: int = 16_700,
    n_edges: int = 165_000,
    dim: int = 256,
    seed: int = 0,
    with_embeddings: bool = True,
) -> KnowledgeGraph:
    """Repository-shaped random graph at a requested node/edge scale."""
    rng = np.random.default_rng(seed)
    g = KnowledgeGraph(graph_id=f"gscale{n_nodes}", repo_url="fixture://scaled",
                       revision="scale", embedding_dim=dim if with_embeddings else None)
    root = g.upsert_node(Node(id="", kind=NodeKind.ROOT, name="scaled", path=""))

    n_folders = max(1, n_nodes // 60)
    n_files = max(2, n_nodes // 4)
    n_entities = n_nodes - 1 - n_folders - n_files

    folder_ids = []
    for i in range(n_folders):
        parent = root if i == 0 else folder_ids[int(rng.integers(0, i))]
        path = f"dir{i:05d}" if i == 0 else f"{g.node(parent).path}/dir{i:05d}"
        folder_ids.append(_folder(g, path, parent))

    file_ids = []
    for i in range(n_files):
        parent = folder_ids[int(rng.integers(0, n_folders))]
        path = f"{g.node(parent).path}/file{i:05d}.py"
        vec = as_unit_f32(rng.random(dim) + 1e-3) if with_embeddings else None
        node = Node(
            id="", kind=NodeKind.FILE, name=f"file{i:05d}.py", path=path, language="python",
            size_bytes=100, raw_content=None, description=f"file {i} synthetic module",
            description_embedding=vec,
        )
        fid = g.upsert_node(node)
        g.add_edge(parent, fid, EdgeKind.CONTAINS)
        file_ids.append(fid)

    function_ids = []
    for i in range(n_entities):
        host = file_ids[int(rng.integers(0, n_files))]
        vec = as_unit_f32(rng.random(dim) + 1e-3) if with_embeddings else None
        node = Node(
            id="", kind=NodeKind.FUNCTION, name=f"fn{i:06d}", path=g.node(host).path,
            qualified_name=f"fn{i:06d}", parent_id=host,
            description=f"function {i} synthetic behavior", description_embedding=vec,
        )
        nid = g.upsert_node(node)
        g.add_edge(host, nid, EdgeKind.IMPLEMENTS)
        function_ids.append(nid)

    structural = g.edge_count()
    calls_needed = max(0, n_edges - structural)
    attempts = 0
    added = 0
    n_funcs = len(function_ids)
    while added < calls_needed and attempts < calls_needed * 4:
        attempts += 1
        a = function_ids[int(rng.integers(0, n_funcs))]
        b = function_ids[int(rng.integers(0, n_funcs))]
        if a == b or g.has_edge(a, b, EdgeKind.CALLS):
            continue
        g.add_edge(a, b, EdgeKind.CALLS)
        added += 1
    return g
