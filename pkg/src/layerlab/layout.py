"""Ground-truth layered layout: ranks, median ordering, crossings, lengths.

All edges are treated as undirected for ranking and neighborhood purposes;
stored direction only matters for rendering.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from statistics import median
from typing import Iterable, Mapping, Sequence

from .graph import Edge, Graph, NodeId, node_sort_key


class LayoutError(ValueError):
    """Input inconsistent with the layout operation."""


class LongEdgeError(LayoutError):
    """An edge spans more than one layer gap."""


@dataclass(frozen=True)
class RankAssignment:
    """Layer index per node.

    ``ranks`` covers reachable nodes only; nodes a search could not reach are
    listed in ``unreachable`` instead of being silently dropped. ``order``
    keeps the visiting order so layers can be listed the way they were
    discovered; without it layers are listed by ascending node id.
    """

    ranks: Mapping[NodeId, int]
    source: NodeId | None = None
    unreachable: frozenset = frozenset()
    order: tuple[NodeId, ...] | None = None
    layer_count: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranks", dict(self.ranks))
        object.__setattr__(self, "unreachable", frozenset(self.unreachable))
        if any(r < 0 for r in self.ranks.values()):
            raise LayoutError("ranks must be non-negative")
        if self.source is not None and self.source in self.ranks and self.ranks[self.source] != 0:
            raise LayoutError(f"source {self.source!r} must sit on layer 0")

    def __getitem__(self, node: NodeId) -> int:
        return self.ranks[node]

    def __contains__(self, node: object) -> bool:
        return node in self.ranks

    @property
    def num_layers(self) -> int:
        used = max(self.ranks.values(), default=-1) + 1
        return max(used, self.layer_count or 0)

    def to_ordering(self) -> LayeredOrdering:
        nodes = self.order if self.order is not None else sorted(self.ranks, key=node_sort_key)
        layers: list[list[NodeId]] = [[] for _ in range(self.num_layers)]
        for node in nodes:
            layers[self.ranks[node]].append(node)
        return LayeredOrdering(layers)


@dataclass(frozen=True)
class LayeredOrdering:
    """Ordered node lists, one per layer; list position is the in-layer index."""

    layers: tuple[tuple[NodeId, ...], ...]

    def __init__(self, layers: Iterable[Iterable[NodeId]]):
        frozen = tuple(tuple(layer) for layer in layers)
        seen: set = set()
        for layer in frozen:
            for node in layer:
                if node in seen:
                    raise LayoutError(f"node {node!r} appears in more than one layer slot")
                seen.add(node)
        object.__setattr__(self, "layers", frozen)

    def __len__(self) -> int:
        return len(self.layers)

    def __getitem__(self, i: int) -> tuple[NodeId, ...]:
        return self.layers[i]

    def __iter__(self):
        return iter(self.layers)

    def layer_of(self) -> dict[NodeId, int]:
        return {n: i for i, layer in enumerate(self.layers) for n in layer}

    def position_of(self) -> dict[NodeId, int]:
        return {n: j for layer in self.layers for j, n in enumerate(layer)}

    def nodes(self) -> list[NodeId]:
        return [n for layer in self.layers for n in layer]

    def to_ranks(self, source: NodeId | None = None) -> RankAssignment:
        return RankAssignment(self.layer_of(), source=source, order=tuple(self.nodes()))

    def to_lists(self) -> list[list[NodeId]]:
        return [list(layer) for layer in self.layers]


@dataclass(frozen=True)
class CrossingReport:
    total: int
    per_gap: tuple[tuple[int, int], ...] = ()
    pairs: tuple[tuple[tuple[NodeId, NodeId], tuple[NodeId, NodeId]], ...] | None = None


@dataclass(frozen=True)
class GridPositions:
    positions: Mapping[NodeId, tuple[float, float]]
    spacing: float = 100.0

    def __getitem__(self, node: NodeId) -> tuple[float, float]:
        return self.positions[node]

    def __contains__(self, node: object) -> bool:
        return node in self.positions

    def __len__(self) -> int:
        return len(self.positions)


def _reject_self_loops(g: Graph) -> None:
    for e in g.edges:
        if e.is_loop:
            raise LayoutError(f"self-loop on node {e.source!r} is not supported by the layout engine")


def assign_layers_bfs(g: Graph, source: NodeId) -> RankAssignment:
    """Rank every node by its hop distance from ``source``.

    Layers are expanded in discovery order and each node's neighbors are
    taken in edge-list order, which reproduces the layer listings used in
    the prompts. The ranks themselves do not depend on either order.
    """
    if source not in g:
        raise LayoutError(f"source {source!r} is not a node of the graph")
    _reject_self_loops(g)
    adj = g.neighbors()
    ranks = {source: 0}
    order = [source]
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for nb in adj[node]:
            if nb not in ranks:
                ranks[nb] = ranks[node] + 1
                order.append(nb)
                queue.append(nb)
    unreachable = frozenset(n for n in g.node_ids if n not in ranks)
    return RankAssignment(ranks, source=source, unreachable=unreachable, order=tuple(order))


def is_valid_layering(g: Graph, r: RankAssignment | Mapping[NodeId, int], source: NodeId) -> bool:
    """Weak validity for a claimed shortest-path layering.

    The map must be total over the nodes, put ``source`` alone at rank 0 and
    give every node on layer ``k > 0`` a neighbor on layer ``k - 1``.
    """
    ranks = r.ranks if isinstance(r, RankAssignment) else dict(r)
    if set(ranks) != set(g.node_ids) or ranks.get(source) != 0:
        return False
    if any(not isinstance(v, int) or v < 0 for v in ranks.values()):
        return False
    if any(v == 0 for n, v in ranks.items() if n != source):
        return False
    adj = g.neighbors()
    return all(v == 0 or any(ranks[nb] == v - 1 for nb in adj[n]) for n, v in ranks.items())


def remove_same_layer_edges(g: Graph, r: RankAssignment) -> Graph:
    _require_ranked(g, r)
    return g.with_edges(e for e in g.edges if r[e.source] != r[e.target])


def _require_ranked(g: Graph, r: RankAssignment) -> None:
    for e in g.edges:
        for end in (e.source, e.target):
            if end not in r:
                raise LayoutError(f"node {end!r} has no rank")


def _check_ordering(lo: LayeredOrdering, g: Graph) -> dict[NodeId, int]:
    layer_of = lo.layer_of()
    for node in layer_of:
        if node not in g:
            raise LayoutError(f"ordering mentions unknown node {node!r}")
    return layer_of


def median_sweep(
    lo: LayeredOrdering,
    g: Graph,
    passes: int = 1,
    direction: str = "down",
) -> LayeredOrdering:
    """Reorder layers by the median position of adjacent-layer neighbors.

    A downward pass visits layers top to bottom; each node is keyed by the
    median 0-based index of its neighbors in the next layer, read before
    that layer is itself reordered. Nodes without such neighbors get key 0.
    Sorting is stable, so equal keys keep their previous relative order.
    ``direction="up"`` mirrors this against the previous layer and
    ``"alternate"`` switches direction every pass.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    if direction not in ("down", "up", "alternate"):
        raise ValueError(f"unknown sweep direction {direction!r}")
    layer_of = _check_ordering(lo, g)
    adj = g.neighbors()
    for e in g.edges:
        if e.source in layer_of and e.target in layer_of and layer_of[e.source] == layer_of[e.target]:
            raise LayoutError(f"edge ({e.source}, {e.target}) joins two nodes of layer {layer_of[e.source]}")
    layers = [list(layer) for layer in lo.layers]
    for p in range(passes):
        down = direction == "down" or (direction == "alternate" and p % 2 == 0)
        indices = range(len(layers)) if down else range(len(layers) - 1, -1, -1)
        for i in indices:
            ref = i + 1 if down else i - 1
            if not 0 <= ref < len(layers):
                continue  # no adjacent layer: every key is 0, stable sort is the identity
            pos = {n: j for j, n in enumerate(layers[ref])}

            def key(node: NodeId) -> float:
                found = [pos[nb] for nb in adj[node] if nb in pos]
                return median(found) if found else 0

            layers[i] = sorted(layers[i], key=key)
    return LayeredOrdering(layers)


def count_crossings_bipartite(
    order_a: Sequence[NodeId],
    order_b: Sequence[NodeId],
    edges: Iterable[tuple[NodeId, NodeId] | Edge],
    with_pairs: bool = False,
) -> CrossingReport:
    """Count crossings between two ordered layers.

    Two edges cross when their endpoint orders disagree on both sides;
    edges sharing an endpoint never cross. Counting uses an accumulator
    tree over the lower layer (Barth, Juenger and Mutzel), O(E log |B|).
    """
    pa = {n: i for i, n in enumerate(order_a)}
    pb = {n: i for i, n in enumerate(order_b)}
    oriented = []
    for e in edges:
        s, t = (e.source, e.target) if isinstance(e, Edge) else (e[0], e[1])
        if s in pa and t in pb:
            oriented.append((s, t))
        elif t in pa and s in pb:
            oriented.append((t, s))
        else:
            raise LayoutError(f"edge ({s}, {t}) does not join the two layers")
    oriented.sort(key=lambda st: (pa[st[0]], pb[st[1]]))

    size = 1
    while size < max(len(order_b), 1):
        size *= 2
    tree = [0] * (2 * size - 1)
    total = 0
    for _, t in oriented:
        idx = pb[t] + size - 1
        tree[idx] += 1
        while idx > 0:
            if idx % 2:  # left child: everything in the right sibling lies strictly further right
                total += tree[idx + 1]
            idx = (idx - 1) // 2
            tree[idx] += 1

    pairs = None
    if with_pairs:
        found = []
        for i, (s1, t1) in enumerate(oriented):
            for s2, t2 in oriented[i + 1 :]:
                if pa[s2] > pa[s1] and pb[t2] < pb[t1]:
                    found.append(((s1, t1), (s2, t2)))
        pairs = tuple(found)
    return CrossingReport(total, ((0, total),), pairs)


def count_crossings_total(lo: LayeredOrdering, g: Graph, with_pairs: bool = False) -> CrossingReport:
    layer_of = _check_ordering(lo, g)
    gaps: list[list[Edge]] = [[] for _ in range(max(len(lo) - 1, 0))]
    for e in g.edges:
        if e.source not in layer_of or e.target not in layer_of:
            raise LayoutError(f"edge ({e.source}, {e.target}) has an endpoint outside the ordering")
        a, b = layer_of[e.source], layer_of[e.target]
        if a == b:
            raise LayoutError(f"edge ({e.source}, {e.target}) joins two nodes of layer {a}")
        if abs(a - b) > 1:
            raise LongEdgeError(f"edge ({e.source}, {e.target}) spans layers {a} and {b}")
        gaps[min(a, b)].append(e)
    per_gap = []
    pairs: list | None = [] if with_pairs else None
    for i, gap_edges in enumerate(gaps):
        rep = count_crossings_bipartite(lo[i], lo[i + 1], gap_edges, with_pairs)
        per_gap.append((i, rep.total))
        if pairs is not None:
            pairs.extend(rep.pairs)
    return CrossingReport(
        sum(c for _, c in per_gap), tuple(per_gap), None if pairs is None else tuple(pairs)
    )


def gap_instances(lo: LayeredOrdering, g: Graph) -> list[tuple[list[NodeId], list[NodeId], list[tuple[NodeId, NodeId]]]]:
    """Split a layered drawing into one bipartite instance per layer gap.

    Edges keep their input order and are oriented upper layer first.
    """
    layer_of = _check_ordering(lo, g)
    out = [(list(lo[i]), list(lo[i + 1]), []) for i in range(len(lo) - 1)]
    for e in g.edges:
        a, b = layer_of[e.source], layer_of[e.target]
        if abs(a - b) > 1:
            raise LongEdgeError(f"edge ({e.source}, {e.target}) spans layers {a} and {b}")
        if a == b:
            continue
        pair = (e.source, e.target) if a < b else (e.target, e.source)
        out[min(a, b)][2].append(pair)
    return out


def total_edge_length(r: RankAssignment | Mapping[NodeId, int], g: Graph) -> int:
    ranks = r.ranks if isinstance(r, RankAssignment) else r
    total = 0
    for e in g.edges:
        try:
            total += abs(ranks[e.source] - ranks[e.target])
        except KeyError as exc:
            raise LayoutError(f"node {exc.args[0]!r} has no rank") from None
    return total


def random_layering(g: Graph, num_layers: int, seed: int | str = 0, source: NodeId | None = None) -> RankAssignment:
    """Put every node on an independently uniform layer.

    With ``source`` given, that node is pinned to layer 0 and the others are
    drawn from ``1..num_layers-1`` (the shape of the hand-made relayering
    pools); otherwise every node, including layer 0's, is random and layers
    may come out empty.
    """
    if num_layers < 1:
        raise ValueError("num_layers must be >= 1")
    if source is not None and source not in g:
        raise LayoutError(f"source {source!r} is not a node of the graph")
    rng = random.Random(seed)
    ranks = {}
    for node in g.node_ids:
        if source is not None and node == source:
            ranks[node] = 0
        elif source is not None and num_layers > 1:
            ranks[node] = rng.randrange(1, num_layers)
        else:
            ranks[node] = rng.randrange(num_layers)
    return RankAssignment(ranks, source=source, layer_count=num_layers)


def assign_coordinates(lo: LayeredOrdering, spacing: float = 100.0, orientation: str = "horizontal") -> GridPositions:
    """Grid coordinates: layer index on one axis, in-layer index on the other."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if orientation not in ("horizontal", "vertical"):
        raise ValueError(f"unknown orientation {orientation!r}")
    if not any(lo.layers):
        raise LayoutError("cannot place an empty ordering")
    pos = {}
    for i, layer in enumerate(lo.layers):
        for j, node in enumerate(layer):
            xy = (i * spacing, j * spacing)
            pos[node] = xy if orientation == "horizontal" else (xy[1], xy[0])
    return GridPositions(pos, spacing)


@dataclass
class SugiyamaResult:
    ranks: RankAssignment
    pruned: Graph
    initial: LayeredOrdering
    ordering: LayeredOrdering
    positions: GridPositions
    crossings_before: int
    crossings_after: int
    removed_edges: list[Edge] = field(default_factory=list)


def layout_pipeline(
    g: Graph,
    source: NodeId,
    passes: int = 1,
    direction: str = "down",
    spacing: float = 100.0,
    orientation: str = "horizontal",
) -> SugiyamaResult:
    """BFS ranks, same-layer pruning, median sweep and grid placement."""
    ranks = assign_layers_bfs(g, source)
    if ranks.unreachable:
        raise LayoutError(f"nodes unreachable from {source!r}: {sorted(ranks.unreachable, key=node_sort_key)}")
    pruned = remove_same_layer_edges(g, ranks)
    initial = ranks.to_ordering()
    swept = median_sweep(initial, pruned, passes, direction)
    removed = [e for e in g.edges if ranks[e.source] == ranks[e.target]]
    return SugiyamaResult(
        ranks=ranks,
        pruned=pruned,
        initial=initial,
        ordering=swept,
        positions=assign_coordinates(swept, spacing, orientation),
        crossings_before=count_crossings_total(initial, pruned).total,
        crossings_after=count_crossings_total(swept, pruned).total,
        removed_edges=removed,
    )
