"""repokg: typed repository knowledge graphs with semantic retrieval."""

from .graph import KnowledgeGraph
from .model import Edge, EdgeKind, GraphStats, Node, NodeKind
from .snapshot import load_snapshot, save_snapshot

__version__ = "0.1.0"

__all__ = [
    "KnowledgeGraph",
    "Node",
    "Edge",
    "NodeKind",
    "EdgeKind",
    "GraphStats",
    "save_snapshot",
    "load_snapshot",
    "__version__",
]
