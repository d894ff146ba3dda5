from .base import ALGORITHMS, NOISE, ClusterAssignment, relabel_by_size
from .dbscan import dbscan
from .hierarchical import Dendrogram, hierarchical, ward_linkage
from .kmeans import kmeans
from .som import SomGrid, grid_side, som, train_som

__all__ = [
    "ALGORITHMS",
    "NOISE",
    "ClusterAssignment",
    "Dendrogram",
    "SomGrid",
    "dbscan",
    "grid_side",
    "hierarchical",
    "kmeans",
    "relabel_by_size",
    "som",
    "train_som",
    "ward_linkage",
]
