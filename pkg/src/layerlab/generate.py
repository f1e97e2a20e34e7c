"""Seeded random graphs: constraint-driven instances and benchmark stand-ins."""

from __future__ import annotations

import datetime as dt
import random
from dataclasses import dataclass
from itertools import combinations

from .graph import Edge, Graph, Node


class InfeasibleGraphError(ValueError):
    """No graph satisfies the requested node/edge counts."""


@dataclass(frozen=True)
class AttributeSpec:
    """Optional node/edge attributes to attach to a generated graph.

    ``timestamp_range`` is an inclusive ``(first, last)`` date pair.
    ``weight_above`` is a strict lower bound; weights are drawn from
    ``(weight_above, weight_above + 10]``.
    """

    timestamp_range: tuple[dt.date, dt.date] | None = None
    weight_above: float | None = None
    labels: bool = False

    def __post_init__(self) -> None:
        if self.timestamp_range is not None:
            first, last = self.timestamp_range
            if first > last:
                raise ValueError(f"empty date range {first}..{last}")


def generate_random_graph(
    n: int,
    m: int,
    attrs: AttributeSpec | None = None,
    seed: int = 0,
    simple: bool = True,
    first_id: int = 0,
    directed: bool = True,
) -> Graph:
    """Draw ``m`` edges uniformly over the ``n``-node id range.

    In simple mode edges are sampled without replacement from unordered
    pairs, so ``m`` may not exceed ``n * (n - 1) / 2``. Otherwise parallel
    edges are allowed (never self-loops).
    """
    if n < 1:
        raise InfeasibleGraphError(f"need at least one node, got n={n}")
    if m < 0:
        raise InfeasibleGraphError(f"edge count must be non-negative, got m={m}")
    max_pairs = n * (n - 1) // 2
    if m > 0 and max_pairs == 0:
        raise InfeasibleGraphError(f"a single node cannot carry {m} edges without self-loops")
    if simple and m > max_pairs:
        raise InfeasibleGraphError(f"a simple graph on {n} nodes has at most {max_pairs} edges, asked for {m}")
    attrs = attrs or AttributeSpec()
    rng = random.Random(seed)
    ids = list(range(first_id, first_id + n))
    pairs = list(combinations(ids, 2))
    chosen = rng.sample(pairs, m) if simple else [rng.choice(pairs) for _ in range(m)]

    edges = []
    for a, b in chosen:
        if rng.random() < 0.5:
            a, b = b, a
        weight = None
        if attrs.weight_above is not None:
            weight = attrs.weight_above + 10.0 * (1.0 - rng.random())
        edges.append(Edge(a, b, weight))

    nodes = []
    for i in ids:
        ts = None
        if attrs.timestamp_range is not None:
            first, last = attrs.timestamp_range
            ts = first + dt.timedelta(days=rng.randint(0, (last - first).days))
        nodes.append(Node(i, f"Node {i}" if attrs.labels else None, ts))
    return Graph(tuple(nodes), tuple(edges), directed)


def random_connected_graph(n: int, m: int, seed: int = 0, directed: bool = True) -> Graph:
    """Connected simple graph: a random spanning tree plus extra random edges.

    Stands in for the small benchmark-corpus graphs when the corpus itself is
    not available. Edge order is shuffled so that input order carries no
    breadth-first structure.
    """
    if n < 1:
        raise InfeasibleGraphError(f"need at least one node, got n={n}")
    if not n - 1 <= m <= n * (n - 1) // 2:
        raise InfeasibleGraphError(f"a connected simple graph on {n} nodes needs {n - 1}..{n * (n - 1) // 2} edges, got {m}")
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    chosen = set()
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        chosen.add((min(a, b), max(a, b)))
    rest = [p for p in combinations(range(n), 2) if p not in chosen]
    chosen.update(rng.sample(rest, m - (n - 1)))
    edges = sorted(chosen)
    rng.shuffle(edges)
    oriented = [(a, b) if rng.random() < 0.5 else (b, a) for a, b in edges]
    return Graph.from_edges(oriented, nodes=range(n), directed=directed)
