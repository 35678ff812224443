"""Graph-level statistics: Freeman centralizations, transitivity, path length, density.

Shortest paths for all sources are found at once by a level-synchronous BFS
expressed as matrix products (row ``s`` of every matrix belongs to source
``s``), which also yields geodesic counts.  Betweenness then follows by
Brandes' back-accumulation, again one BFS level at a time.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import comb

import numpy as np

from .graph import Graph

UNREACHABLE = -1


class StatisticKind(str, Enum):
    DEGREE_CENT = "deg_cent"
    DEGREE_CENT_NORM = "deg_cent_norm"
    BETWEENNESS_CENT = "btw_cent"
    BETWEENNESS_CENT_NORM = "btw_cent_norm"
    CLOSENESS_CENT = "clo_cent"
    CLOSENESS_CENT_NORM = "clo_cent_norm"
    TRANSITIVITY = "transitivity"
    AVG_PATH_LENGTH = "avg_path_length"
    DENSITY = "density"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def is_normalized(self) -> bool:
        return self.value.endswith("_norm")

    @property
    def raw_counterpart(self) -> StatisticKind:
        return StatisticKind(self.value[: -len("_norm")]) if self.is_normalized else self


_LABELS = {
    StatisticKind.DEGREE_CENT: "Deg. Cent.",
    StatisticKind.DEGREE_CENT_NORM: "Deg. Cent. (N)",
    StatisticKind.BETWEENNESS_CENT: "Betw. Cent.",
    StatisticKind.BETWEENNESS_CENT_NORM: "Betw. Cent. (N)",
    StatisticKind.CLOSENESS_CENT: "Clos. Cent.",
    StatisticKind.CLOSENESS_CENT_NORM: "Clos. Cent. (N)",
    StatisticKind.TRANSITIVITY: "Transitivity",
    StatisticKind.AVG_PATH_LENGTH: "Avg. Path Length",
    StatisticKind.DENSITY: "Density",
}

ALL_STATISTICS = tuple(StatisticKind)


class ClosenessMode(str, Enum):
    CAP_N = "cap_n"
    LARGEST_COMPONENT = "largest_component"


class PathLengthConvention(str, Enum):
    MEAN_REACHABLE_PAIRS = "mean_reachable"
    SUM_OVER_N_MINUS_ONE = "sum_over_n_minus_one"


@dataclass(frozen=True)
class Conventions:
    closeness: ClosenessMode = ClosenessMode.CAP_N
    path_length: PathLengthConvention = PathLengthConvention.MEAN_REACHABLE_PAIRS


@dataclass(frozen=True)
class StatisticValue:
    kind: StatisticKind
    value: float
    defined: bool = True

    @classmethod
    def undefined(cls, kind: StatisticKind) -> StatisticValue:
        return cls(kind, float("nan"), False)

    def __eq__(self, other: object) -> bool:
        # Undefined values are equal whatever their placeholder.
        if not isinstance(other, StatisticValue):
            return NotImplemented
        if self.kind is not other.kind or self.defined != other.defined:
            return False
        return not self.defined or self.value == other.value

    def __hash__(self) -> int:
        return hash((self.kind, self.defined, self.value if self.defined else None))


@dataclass(frozen=True)
class DistanceMatrix:
    """Hop distances; unreachable pairs hold :data:`UNREACHABLE`."""

    dist: np.ndarray

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def reachable(self) -> np.ndarray:
        return self.dist != UNREACHABLE


@dataclass(frozen=True)
class _Geodesics:
    dist: np.ndarray  # int64, UNREACHABLE where no path
    sigma: np.ndarray  # float64 geodesic counts, sigma[s, s] = 1
    levels: list[np.ndarray]  # levels[d][s, v] iff dist[s, v] == d


def _geodesics(adj: np.ndarray) -> _Geodesics:
    n = adj.shape[0]
    a = adj.astype(np.float64)
    dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    sigma = np.eye(n)
    frontier = np.eye(n, dtype=bool)
    visited = frontier.copy()
    levels = [frontier]
    d = 0
    while True:
        reach = np.where(frontier, sigma, 0.0) @ a
        new = (reach > 0) & ~visited
        if not new.any():
            break
        d += 1
        sigma[new] = reach[new]
        dist[new] = d
        visited |= new
        frontier = new
        levels.append(new)
    return _Geodesics(dist, sigma, levels)


def all_pairs_shortest_paths(g: Graph) -> DistanceMatrix:
    return DistanceMatrix(_geodesics(g.adjacency).dist)


def _betweenness_scores(adj: np.ndarray, geo: _Geodesics) -> np.ndarray:
    # Each unordered source-target pair is counted once.
    a = adj.astype(np.float64)
    sigma = geo.sigma
    delta = np.zeros_like(sigma)
    for d in range(len(geo.levels) - 1, 0, -1):
        coef = np.divide(1.0 + delta, sigma, out=np.zeros_like(sigma), where=geo.levels[d])
        delta += np.where(geo.levels[d - 1], sigma * (coef @ a), 0.0)
    np.fill_diagonal(delta, 0.0)
    return delta.sum(axis=0) / 2.0


def vertex_betweenness(g: Graph) -> np.ndarray:
    return _betweenness_scores(g.adjacency, _geodesics(g.adjacency))


def _largest_component(dist: np.ndarray) -> np.ndarray:
    reach = dist != UNREACHABLE
    sizes = reach.sum(axis=1)
    root = int(np.argmax(sizes))  # first node of a largest component
    return np.flatnonzero(reach[root])


def _closeness_scores(dist: np.ndarray, mode: ClosenessMode) -> np.ndarray:
    if mode is ClosenessMode.LARGEST_COMPONENT:
        keep = _largest_component(dist)
        dist = dist[np.ix_(keep, keep)]
    n = dist.shape[0]
    capped = np.where(dist == UNREACHABLE, n, dist)
    return 1.0 / capped.sum(axis=1)


def vertex_closeness(g: Graph, mode: ClosenessMode = ClosenessMode.CAP_N) -> np.ndarray:
    """Reciprocal distance sums; under ``CAP_N`` an unreachable pair counts distance ``n``."""
    if g.n < 2:
        raise ValueError("closeness needs at least two nodes")
    return _closeness_scores(_geodesics(g.adjacency).dist, mode)


def freeman(scores: np.ndarray) -> float:
    """Freeman centralization: sum over vertices of (max score - score)."""
    return float(np.sum(scores.max() - scores))


def max_degree_centralization(n: int) -> float:
    return float((n - 1) * (n - 2))


def max_betweenness_centralization(n: int) -> float:
    return (n - 1) ** 2 * (n - 2) / 2.0


def max_closeness_centralization(n: int) -> float:
    # Star: hub 1/(n-1), leaves 1/(2n-3).
    return (n - 2) / (2.0 * n - 3.0)


def _require_normalizable(n: int) -> None:
    if n < 3:
        raise ValueError(f"normalized centralization needs n >= 3, got n={n}")


def _degree_value(adj: np.ndarray, normalized: bool) -> StatisticValue:
    n = adj.shape[0]
    raw = freeman(adj.sum(axis=1).astype(np.float64))
    if normalized:
        return StatisticValue(StatisticKind.DEGREE_CENT_NORM, raw / max_degree_centralization(n))
    return StatisticValue(StatisticKind.DEGREE_CENT, raw)


def _betweenness_value(scores: np.ndarray, normalized: bool) -> StatisticValue:
    n = scores.shape[0]
    raw = freeman(scores)
    if normalized:
        return StatisticValue(StatisticKind.BETWEENNESS_CENT_NORM, raw / max_betweenness_centralization(n))
    return StatisticValue(StatisticKind.BETWEENNESS_CENT, raw)


def _closeness_value(dist: np.ndarray, normalized: bool, mode: ClosenessMode) -> StatisticValue:
    kind = StatisticKind.CLOSENESS_CENT_NORM if normalized else StatisticKind.CLOSENESS_CENT
    n = dist.shape[0]
    if mode is ClosenessMode.LARGEST_COMPONENT:
        n = _largest_component(dist).size
    if n < 2 or (normalized and n < 3):
        return StatisticValue.undefined(kind)
    raw = freeman(_closeness_scores(dist, mode))
    if normalized:
        return StatisticValue(kind, raw / max_closeness_centralization(n))
    return StatisticValue(kind, raw)


def degree_centralization(g: Graph, normalized: bool = False) -> StatisticValue:
    if normalized:
        _require_normalizable(g.n)
    return _degree_value(g.adjacency, normalized)


def betweenness_centralization(g: Graph, normalized: bool = False) -> StatisticValue:
    if normalized:
        _require_normalizable(g.n)
    return _betweenness_value(vertex_betweenness(g), normalized)


def closeness_centralization(
    g: Graph, normalized: bool = False, mode: ClosenessMode = ClosenessMode.CAP_N
) -> StatisticValue:
    """Freeman closeness centralization.

    ``CAP_N`` keeps all nodes and assigns distance ``n`` to unreachable pairs;
    ``LARGEST_COMPONENT`` measures only the largest connected component and
    normalizes by the maximum for that component's size.  A one-node graph
    (or component) has no pairs and yields an undefined value.
    """
    if normalized:
        _require_normalizable(g.n)
    return _closeness_value(_geodesics(g.adjacency).dist, normalized, mode)


def subgraph_census(g: Graph) -> tuple[int, int, int]:
    """Counts of edges, 2-stars and triangles."""
    # Float products go through BLAS and stay exact at these magnitudes.
    a = g.adjacency.astype(np.float64)
    deg = g.adjacency.sum(axis=1).astype(np.int64)
    two_stars = int((deg * (deg - 1) // 2).sum())
    triangles = int(round(float(((a @ a) * a).sum()))) // 6
    return int(deg.sum()) // 2, two_stars, triangles


def _transitivity_from_census(two_stars: int, triangles: int) -> StatisticValue:
    if two_stars == 0:
        return StatisticValue.undefined(StatisticKind.TRANSITIVITY)
    return StatisticValue(StatisticKind.TRANSITIVITY, 3.0 * triangles / two_stars)


def transitivity(g: Graph) -> StatisticValue:
    _, two_stars, triangles = subgraph_census(g)
    return _transitivity_from_census(two_stars, triangles)


def _path_length_value(dist: np.ndarray, convention: PathLengthConvention) -> StatisticValue:
    kind = StatisticKind.AVG_PATH_LENGTH
    n = dist.shape[0]
    off = dist[~np.eye(n, dtype=bool)]
    if off.size == 0:
        return StatisticValue.undefined(kind)
    if convention is PathLengthConvention.SUM_OVER_N_MINUS_ONE:
        if (off == UNREACHABLE).any():
            return StatisticValue.undefined(kind)
        return StatisticValue(kind, float(off.sum()) / (n - 1))
    reach = off[off != UNREACHABLE]
    if reach.size == 0:
        return StatisticValue.undefined(kind)
    return StatisticValue(kind, float(reach.sum()) / reach.size)


def average_path_length(
    g: Graph, convention: PathLengthConvention = PathLengthConvention.MEAN_REACHABLE_PAIRS
) -> StatisticValue:
    """Mean geodesic length.

    The default averages over ordered reachable pairs.  ``SUM_OVER_N_MINUS_ONE`` uses
    the ``(1/(n-1)) * sum_i sum_{j != i} d_ij`` form and is undefined unless the
    graph is connected.
    """
    return _path_length_value(_geodesics(g.adjacency).dist, convention)


def _density_value(n: int, edges: int) -> StatisticValue:
    if n < 2:
        return StatisticValue.undefined(StatisticKind.DENSITY)
    return StatisticValue(StatisticKind.DENSITY, edges / comb(n, 2))


def density(g: Graph) -> StatisticValue:
    return _density_value(g.n, g.edge_count)


def compute_all(g: Graph, conventions: Conventions = Conventions()) -> dict[StatisticKind, StatisticValue]:
    """All nine statistics from a single shortest-path pass.

    Normalized centralizations are undefined (rather than an error) for n < 3.
    """
    adj = g.adjacency
    n = g.n
    geo = _geodesics(adj)
    btw = _betweenness_scores(adj, geo)
    _, two_stars, triangles = subgraph_census(g)
    out = {
        StatisticKind.DEGREE_CENT: _degree_value(adj, False),
        StatisticKind.BETWEENNESS_CENT: _betweenness_value(btw, False),
        StatisticKind.CLOSENESS_CENT: _closeness_value(geo.dist, False, conventions.closeness),
        StatisticKind.TRANSITIVITY: _transitivity_from_census(two_stars, triangles),
        StatisticKind.AVG_PATH_LENGTH: _path_length_value(geo.dist, conventions.path_length),
        StatisticKind.DENSITY: _density_value(n, g.edge_count),
    }
    if n >= 3:
        out[StatisticKind.DEGREE_CENT_NORM] = _degree_value(adj, True)
        out[StatisticKind.BETWEENNESS_CENT_NORM] = _betweenness_value(btw, True)
        out[StatisticKind.CLOSENESS_CENT_NORM] = _closeness_value(geo.dist, True, conventions.closeness)
    else:
        for kind in (StatisticKind.DEGREE_CENT_NORM, StatisticKind.BETWEENNESS_CENT_NORM,
                     StatisticKind.CLOSENESS_CENT_NORM):
            out[kind] = StatisticValue.undefined(kind)
    return {kind: out[kind] for kind in ALL_STATISTICS}
