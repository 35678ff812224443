"""Simple undirected graphs, block extraction and bipartite projection."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class Graph:
    """Simple undirected graph on nodes ``0..n-1`` backed by a dense boolean adjacency.

    Instances are immutable: the stored adjacency is a private read-only copy.
    ``labels`` optionally maps dense indices back to external node names.
    """

    __slots__ = ("_adj", "labels")

    def __init__(self, adjacency: np.ndarray, labels: Sequence[str] | None = None):
        adj = np.array(adjacency, dtype=bool, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if adj.shape[0] < 1:
            raise ValueError("a graph needs at least one node")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if labels is not None and len(labels) != adj.shape[0]:
            raise ValueError("labels must have one entry per node")
        adj.setflags(write=False)
        self._adj = adj
        self.labels = tuple(labels) if labels is not None else None

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(np.zeros((n, n), dtype=bool))

    @classmethod
    def complete(cls, n: int) -> Graph:
        return cls(~np.eye(n, dtype=bool))

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        return self._adj

    @property
    def edge_count(self) -> int:
        return int(self._adj.sum()) // 2

    def degrees(self) -> np.ndarray:
        return self._adj.sum(axis=1).astype(np.int64)

    def degree(self, i: int) -> int:
        return int(self._adj[i].sum())

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self._adj[i, j])

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self._adj[i])

    def edges(self) -> list[tuple[int, int]]:
        iu, ju = np.nonzero(np.triu(self._adj, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self._adj, other._adj)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"


def build_graph(n: int, edges: Iterable[tuple[int, int]], labels: Sequence[str] | None = None) -> Graph:
    """Build a graph from an edge list; duplicate and reversed pairs collapse to one edge."""
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    adj = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            raise ValueError(f"self-loop ({i}, {j}) not allowed")
        adj[i, j] = adj[j, i] = True
    return Graph(adj, labels)


def extract_block(g: Graph, members: Sequence[int]) -> Graph:
    """Induced subgraph on ``members``, relabelled ``0..len(members)-1`` in the given order."""
    idx = np.asarray(members, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("member set is empty")
    if idx.min() < 0 or idx.max() >= g.n:
        raise ValueError("member index out of range")
    if np.unique(idx).size != idx.size:
        raise ValueError("member set contains duplicates")
    return Graph(g.adjacency[np.ix_(idx, idx)])


@dataclass(frozen=True)
class BipartiteGraph:
    """Two-mode graph: left nodes (people) tied to right nodes (locations)."""

    n_left: int
    n_right: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n_left < 0 or self.n_right < 0:
            raise ValueError("mode sizes must be non-negative")
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            if not (0 <= a < self.n_left and 0 <= b < self.n_right):
                raise ValueError(f"bipartite edge ({a}, {b}) out of range")
        object.__setattr__(self, "edges", edges)

    def incidence(self) -> np.ndarray:
        inc = np.zeros((self.n_left, self.n_right), dtype=bool)
        for a, b in self.edges:
            inc[a, b] = True
        return inc


def project_one_mode(b: BipartiteGraph) -> Graph:
    """Left-mode projection: two left nodes are tied iff they share any right neighbour."""
    if b.n_left < 1:
        raise ValueError("projection needs at least one left-mode node")
    inc = b.incidence().astype(np.int64)
    shared = (inc @ inc.T) > 0
    np.fill_diagonal(shared, False)
    return Graph(shared)


@dataclass(frozen=True)
class Membership:
    """Block assignment of ``n`` nodes into ``k`` neighbourhoods."""

    assignment: np.ndarray
    k: int

    def __post_init__(self) -> None:
        z = np.asarray(self.assignment, dtype=np.int64).copy()
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if z.ndim != 1:
            raise ValueError("assignment must be a vector")
        if z.size and (z.min() < 0 or z.max() >= self.k):
            raise ValueError("block label out of range")
        z.setflags(write=False)
        object.__setattr__(self, "assignment", z)

    @property
    def n(self) -> int:
        return int(self.assignment.size)

    def block_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def blocks(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.assignment == k) for k in range(self.k)]

    def same_block(self) -> np.ndarray:
        z = self.assignment
        return z[:, None] == z[None, :]
