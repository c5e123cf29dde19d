"""Clique-factor laboratory: exact K_r-factor search, robustness counting,
good-partition construction, and the extremal-case factor pipeline."""

__version__ = "0.1.0"

from .graphs import Graph, GraphError, LabeledPartition, Tiling, is_perfect_factor

__all__ = [
    "Graph",
    "GraphError",
    "LabeledPartition",
    "Tiling",
    "is_perfect_factor",
    "__version__",
]
