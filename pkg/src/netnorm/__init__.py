"""Size-aware comparison of network statistics via Mixture Model Adjustment."""
from .graph import Graph, build_graph
from .statistics import ALL_STATISTICS, Conventions, StatisticKind, StatisticValue, compute_all

__version__ = "0.1.0"

__all__ = [
    "ALL_STATISTICS",
    "Conventions",
    "Graph",
    "StatisticKind",
    "StatisticValue",
    "build_graph",
    "compute_all",
]
