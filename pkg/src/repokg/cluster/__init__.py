"""File clustering: semantic, Louvain, and label propagation methods."""

from .assign import (
    MISC_CLUSTER_ID,
    MISC_LABEL,
    ClusterAssignment,
    ClusteringQuality,
    label_clusters,
    misc_group,
)
from .labelprop import is_fixed_point, label_propagation, label_propagation_partition
from .louvain import louvain, louvain_partition, modularity
from .semantic import SemanticClusterParams, semantic_cluster, semantic_cluster_graph
from .view import FileGraphView, file_graph_view, view_from_pairs

__all__ = [
    "ClusterAssignment",
    "ClusteringQuality",
    "MISC_CLUSTER_ID",
    "MISC_LABEL",
    "misc_group",
    "label_clusters",
    "louvain",
    "louvain_partition",
    "modularity",
    "label_propagation",
    "label_propagation_partition",
    "is_fixed_point",
    "semantic_cluster",
    "semantic_cluster_graph",
    "SemanticClusterParams",
    "FileGraphView",
    "file_graph_view",
    "view_from_pairs",
]
