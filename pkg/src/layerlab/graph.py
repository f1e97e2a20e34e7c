"""Immutable graph model shared by every other module."""

from __future__ import annotations

import datetime as dt
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

NodeId = Union[int, str]


class GraphError(ValueError):
    """Raised when a graph violates a structural invariant."""


def node_sort_key(node: NodeId) -> tuple[int, int | str]:
    # ints sort before strings so mixed-id graphs still order deterministically
    if isinstance(node, int):
        return (0, node)
    return (1, node)


@dataclass(frozen=True)
class Node:
    id: NodeId
    label: str | None = None
    timestamp: dt.date | None = None


@dataclass(frozen=True)
class Edge:
    source: NodeId
    target: NodeId
    weight: float | None = None

    def __post_init__(self) -> None:
        if self.weight is not None:
            w = float(self.weight)
            if not math.isfinite(w) or w <= 0:
                raise GraphError(f"edge ({self.source}, {self.target}) has invalid weight {self.weight!r}")

    @property
    def pair(self) -> frozenset:
        return frozenset((self.source, self.target))

    def other(self, node: NodeId) -> NodeId:
        return self.target if node == self.source else self.source

    @property
    def is_loop(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class Graph:
    """Node list plus an ordered edge multiset.

    Edge order is significant: prompts serialize edges in input order and
    breadth-first discovery follows it.
    """

    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()
    directed: bool = True
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        nodes = tuple(n if isinstance(n, Node) else Node(n) for n in self.nodes)
        edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        index: dict[NodeId, Node] = {}
        for node in nodes:
            if isinstance(node.id, bool) or not isinstance(node.id, (int, str)):
                raise GraphError(f"node id must be int or str, got {node.id!r}")
            if isinstance(node.id, int) and node.id < 0:
                raise GraphError(f"node id must be non-negative, got {node.id}")
            if node.id in index:
                raise GraphError(f"duplicate node id {node.id!r}")
            index[node.id] = node
        for e in edges:
            for end in (e.source, e.target):
                if end not in index:
                    raise GraphError(f"edge ({e.source}, {e.target}) references unknown node {end!r}")
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple],
        nodes: Iterable[NodeId] | None = None,
        directed: bool = True,
    ) -> Graph:
        """Build a graph from ``(source, target[, weight])`` tuples.

        When ``nodes`` is omitted the node list is the endpoints in order of
        first appearance.
        """
        edge_objs = [e if isinstance(e, Edge) else Edge(*e) for e in edges]
        if nodes is None:
            seen: dict[NodeId, None] = {}
            for e in edge_objs:
                seen.setdefault(e.source)
                seen.setdefault(e.target)
            nodes = list(seen)
        return cls(tuple(Node(n) if not isinstance(n, Node) else n for n in nodes), tuple(edge_objs), directed)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: object) -> bool:
        return node in self._index

    def __iter__(self) -> Iterator[NodeId]:
        return (n.id for n in self.nodes)

    @property
    def node_ids(self) -> list[NodeId]:
        return [n.id for n in self.nodes]

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def is_weighted(self) -> bool:
        return any(e.weight is not None for e in self.edges)

    def node(self, node_id: NodeId) -> Node:
        return self._index[node_id]

    def edge_pairs(self) -> list[tuple[NodeId, NodeId]]:
        return [(e.source, e.target) for e in self.edges]

    def edge_multiset(self) -> Counter:
        """Multiset of ``(source, target)`` pairs; undirected graphs use unordered pairs."""
        if self.directed:
            return Counter((e.source, e.target) for e in self.edges)
        return Counter(e.pair for e in self.edges)

    def neighbors(self) -> dict[NodeId, list[NodeId]]:
        """Undirected adjacency lists, neighbors in edge-list order, repeats removed."""
        adj: dict[NodeId, list[NodeId]] = {n.id: [] for n in self.nodes}
        seen: dict[NodeId, set] = {n.id: set() for n in self.nodes}
        for e in self.edges:
            for a, b in ((e.source, e.target), (e.target, e.source)):
                if b not in seen[a]:
                    seen[a].add(b)
                    adj[a].append(b)
        return adj

    def with_edges(self, edges: Iterable[Edge]) -> Graph:
        return Graph(self.nodes, tuple(edges), self.directed)

    def to_undirected(self) -> Graph:
        return Graph(self.nodes, self.edges, directed=False)


def same_topology(a: Graph, b: Graph, directed: bool | None = None) -> bool:
    """True when both graphs have the same node set and edge multiset."""
    if set(a.node_ids) != set(b.node_ids):
        return False
    if directed is None:
        directed = a.directed and b.directed
    if directed:
        return Counter(a.edge_pairs()) == Counter(b.edge_pairs())
    return Counter(e.pair for e in a.edges) == Counter(e.pair for e in b.edges)


def is_bulbaceous(g: Graph) -> bool:
    """Edge count is a multiple of node count."""
    if g.num_nodes < 1:
        raise GraphError("bulbaceous is undefined for a graph without nodes")
    return g.num_edges % g.num_nodes == 0


def is_flamboyous(g: Graph) -> bool:
    """No two edges join the same unordered pair of nodes."""
    pairs = [e.pair for e in g.edges]
    return len(set(pairs)) == len(pairs)
