"""Task kinds, prompting strategies and per-task ground truth.

A task *instance* is a JSON-serializable payload; everything else
(ground truth, the oracle's own answer, scoring context) is recomputed
from it, so prompt files stay self-contained.
"""

from __future__ import annotations

import datetime as dt
import random
from dataclasses import dataclass
from enum import Enum
from typing import Any

from ..formats import graph_from_dict, graph_to_dict
from ..generate import AttributeSpec, generate_random_graph
from ..graph import Edge, Graph, Node, NodeId, is_bulbaceous, is_flamboyous
from ..layout import (
    LayeredOrdering,
    assign_layers_bfs,
    count_crossings_bipartite,
    count_crossings_total,
    gap_instances,
    median_sweep,
    random_layering,
    remove_same_layer_edges,
    total_edge_length,
)


class TaskKind(str, Enum):
    LAYER_ASSIGNMENT = "layer_assignment"
    SORT_LAYERS = "sort_layers"
    COUNT_CROSSINGS = "count_crossings"
    EDGE_LENGTH = "edge_length"
    GRAPH_GENERATION = "graph_generation"
    FORMAT_CONVERSION = "format_conversion"
    PROPERTY_CHECK = "property_check"
    GRAPH_FROM_SCENE = "graph_from_scene"
    SCENE_FROM_GRAPH = "scene_from_graph"
    SVG_FROM_DOT = "svg_from_dot"

    @property
    def is_numeric(self) -> bool:
        return self in (TaskKind.COUNT_CROSSINGS, TaskKind.EDGE_LENGTH)


ICL_K_RANGE = (3, 5)


@dataclass(frozen=True)
class Strategy:
    """``standard``, ``steps`` (zero-shot step scaffold) or ``icl``.

    For ``icl`` a fixed ``k`` may be given; ``k=None`` draws it per prompt
    from 3..5.
    """

    kind: str = "standard"
    k: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("standard", "steps", "icl"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.kind != "icl" and self.k is not None:
            raise ValueError(f"{self.kind} prompts carry no examples")
        if self.k is not None and not ICL_K_RANGE[0] <= self.k <= ICL_K_RANGE[1]:
            raise ValueError(f"ICL k must lie in {ICL_K_RANGE[0]}..{ICL_K_RANGE[1]}, got {self.k}")

    @classmethod
    def parse(cls, text: str, k: int | None = None) -> Strategy:
        kind = text.strip().lower()
        if kind.startswith("icl(") and kind.endswith(")"):
            return cls("icl", int(kind[4:-1]))
        return cls(kind, k if kind == "icl" else None)

    def __str__(self) -> str:
        if self.kind == "icl" and self.k is not None:
            return f"icl({self.k})"
        return self.kind


STANDARD = Strategy("standard")
STEPS = Strategy("steps")


@dataclass(frozen=True)
class TaskInstance:
    id: str
    task: TaskKind
    payload: dict
    graph_id: str = ""


def _edges(payload_edges) -> list[tuple[NodeId, NodeId]]:
    return [(e[0], e[1]) for e in payload_edges]


def _pairs(edges) -> list[list[NodeId]]:
    return [[s, t] for s, t in edges]


# -- instance builders -------------------------------------------------------

PEOPLE = (
    "Alice", "Bob", "Claire", "Daniel", "Ed", "Fiona", "George", "Hannah",
    "Ivan", "Julia", "Kevin", "Laura", "Marco", "Nina", "Oscar", "Petra",
)
_ACTIVITIES = (
    "had a long chat by the coffee machine",
    "worked together on the quarterly report",
    "met to review the new design",
    "did pair programming in the side room",
    "had lunch together",
    "discussed a deadline over email",
)


def name_graph(g: Graph) -> Graph:
    """Relabel nodes with people's names, keeping topology and order."""
    if g.num_nodes > len(PEOPLE):
        names = {n: f"{PEOPLE[i % len(PEOPLE)]}{i // len(PEOPLE) + 1}" for i, n in enumerate(g.node_ids)}
    else:
        names = {n: PEOPLE[i] for i, n in enumerate(g.node_ids)}
    return Graph(
        tuple(Node(names[n.id]) for n in g.nodes),
        tuple(Edge(names[e.source], names[e.target], e.weight) for e in g.edges),
        directed=False,
    )


def write_scene(g: Graph, seed: int = 0) -> str:
    """One sentence per distinct interaction, plus a line for loners."""
    rng = random.Random(seed)
    sentences = []
    seen = set()
    for e in g.edges:
        if e.pair in seen or e.is_loop:
            continue
        seen.add(e.pair)
        sentences.append(f"{e.source} and {e.target} {rng.choice(_ACTIVITIES)}.")
    touched = {n for p in seen for n in p}
    for n in g.node_ids:
        if n not in touched:
            sentences.append(f"{n} spent the whole day alone at their desk.")
    return " ".join(sentences)


def make_instances(task: TaskKind | str, graph_id: str, g: Graph, seed: int = 0, **options: Any) -> list[TaskInstance]:
    """Derive the task instances the experiments ask about for one graph.

    Crossing counting yields one instance per layer gap; the property check
    yields one instance per property; graph generation yields a plain and an
    attributed request.
    """
    task = TaskKind(task)
    source = options.get("source", min(g.node_ids, key=lambda n: (isinstance(n, str), n)) if g.nodes else 0)
    gd = graph_to_dict(g)

    if task is TaskKind.LAYER_ASSIGNMENT:
        return [TaskInstance(graph_id, task, {"graph": gd, "source": source}, graph_id)]

    if task in (TaskKind.SORT_LAYERS, TaskKind.COUNT_CROSSINGS) or (
        task is TaskKind.EDGE_LENGTH and options.get("layering") == "bfs"
    ):
        ranks = assign_layers_bfs(g, source)
        if ranks.unreachable:
            return []  # disconnected graphs have no complete layering
        pruned = remove_same_layer_edges(g, ranks)
        lo = ranks.to_ordering()
        if task is TaskKind.SORT_LAYERS:
            payload = {"edges": _pairs(pruned.edge_pairs()), "layers": lo.to_lists()}
            return [TaskInstance(graph_id, task, payload, graph_id)]
        if task is TaskKind.EDGE_LENGTH:
            payload = {"edges": _pairs(pruned.edge_pairs()), "layers": lo.to_lists()}
            return [TaskInstance(f"{graph_id}/bfs", task, payload, graph_id)]
        return [
            TaskInstance(f"{graph_id}/gap{i}", task, {"a": a, "b": b, "edges": _pairs(edges)}, graph_id)
            for i, (a, b, edges) in enumerate(gap_instances(lo, pruned))
        ]

    if task is TaskKind.EDGE_LENGTH:
        num_layers = options.get("num_layers", 6)
        r = random_layering(g, num_layers, seed=f"{seed}:{graph_id}", source=source)
        payload = {"edges": _pairs(g.edge_pairs()), "layers": r.to_ordering().to_lists()}
        return [TaskInstance(f"{graph_id}/random", task, payload, graph_id)]

    if task is TaskKind.PROPERTY_CHECK:
        return [
            TaskInstance(f"{graph_id}/{prop}", task, {"property": prop, "graph": gd}, graph_id)
            for prop in ("bulbaceous", "flamboyous")
        ]

    if task is TaskKind.GRAPH_GENERATION:
        base = {"n": g.num_nodes, "m": g.num_edges, "seed": seed}
        attrs = {**base, "timestamp_range": ["1970-01-01", "1970-12-31"], "weight_above": 2}
        return [
            TaskInstance(f"{graph_id}/plain", task, base, graph_id),
            TaskInstance(f"{graph_id}/attrs", task, attrs, graph_id),
        ]

    if task is TaskKind.FORMAT_CONVERSION:
        payload = {"graph": gd, "source_format": "graphml", "target_format": "edgelist"}
        return [TaskInstance(graph_id, task, payload, graph_id)]

    named = name_graph(g)
    if task is TaskKind.GRAPH_FROM_SCENE:
        payload = {"scene": write_scene(named, seed), "graph": graph_to_dict(named)}
        return [TaskInstance(graph_id, task, payload, graph_id)]
    if task in (TaskKind.SCENE_FROM_GRAPH, TaskKind.SVG_FROM_DOT):
        return [TaskInstance(graph_id, task, {"graph": graph_to_dict(named)}, graph_id)]
    raise ValueError(f"unhandled task {task}")  # pragma: no cover


# -- ground truth ----------------------------------------------------------


def payload_graph(payload: dict) -> Graph:
    return graph_from_dict(payload["graph"])


def layered_graph(payload: dict) -> tuple[Graph, LayeredOrdering]:
    lo = LayeredOrdering(payload["layers"])
    nodes = lo.nodes()
    known = set(nodes)
    edges = _edges(payload["edges"])
    extra = [n for e in edges for n in e if n not in known]
    return Graph.from_edges(edges, nodes=nodes + list(dict.fromkeys(extra))), lo


def generation_spec(payload: dict) -> AttributeSpec:
    tr = payload.get("timestamp_range")
    return AttributeSpec(
        timestamp_range=None if tr is None else (dt.date.fromisoformat(tr[0]), dt.date.fromisoformat(tr[1])),
        weight_above=payload.get("weight_above"),
    )


def oracle_value(task: TaskKind, payload: dict) -> Any:
    """The answer the deterministic engine gives, in parsed-value form.

    For scene writing and SVG drawing the value is the graph to describe or
    draw; the answer formatter turns it into text.
    """
    task = TaskKind(task)
    if task is TaskKind.LAYER_ASSIGNMENT:
        r = assign_layers_bfs(payload_graph(payload), payload["source"])
        out: dict = {n: r[n] for n in r.order}
        out.update({n: None for n in sorted(r.unreachable, key=str)})
        return out
    if task is TaskKind.SORT_LAYERS:
        g, lo = layered_graph(payload)
        return median_sweep(lo, g).to_lists()
    if task is TaskKind.COUNT_CROSSINGS:
        return count_crossings_bipartite(payload["a"], payload["b"], _edges(payload["edges"])).total
    if task is TaskKind.EDGE_LENGTH:
        g, lo = layered_graph(payload)
        return total_edge_length(lo.layer_of(), g)
    if task is TaskKind.PROPERTY_CHECK:
        g = payload_graph(payload)
        return is_bulbaceous(g) if payload["property"] == "bulbaceous" else is_flamboyous(g)
    if task is TaskKind.GRAPH_GENERATION:
        return generate_random_graph(payload["n"], payload["m"], generation_spec(payload), seed=payload.get("seed", 0))
    if task is TaskKind.FORMAT_CONVERSION:
        return payload_graph(payload)
    return payload_graph(payload)


def ground_truth(task: TaskKind, payload: dict) -> Any:
    """JSON-serializable truth record sufficient to score a parsed answer."""
    task = TaskKind(task)
    if task is TaskKind.LAYER_ASSIGNMENT:
        g = payload_graph(payload)
        r = assign_layers_bfs(g, payload["source"])
        return {
            "ranks": [[n, r[n]] for n in r.order],
            "unreachable": sorted(r.unreachable, key=str),
            "source": payload["source"],
            "graph": payload["graph"],
        }
    if task is TaskKind.SORT_LAYERS:
        g, lo = layered_graph(payload)
        return {
            "layers": lo.to_lists(),
            "edges": payload["edges"],
            "crossings": count_crossings_total(lo, g).total,
            "oracle": median_sweep(lo, g).to_lists(),
        }
    if task in (TaskKind.COUNT_CROSSINGS, TaskKind.EDGE_LENGTH, TaskKind.PROPERTY_CHECK):
        return oracle_value(task, payload)
    if task is TaskKind.GRAPH_GENERATION:
        return {k: payload.get(k) for k in ("n", "m", "timestamp_range", "weight_above")}
    return payload["graph"]


# -- noise -----------------------------------------------------------------


def perturb_value(task: TaskKind, value: Any, rng: random.Random) -> Any:
    """Introduce exactly one small mistake into an oracle value.

    Numbers move by one, orderings get one adjacent transposition, layerings
    get one node shifted by one rank; graph-shaped values lose one edge and
    booleans flip. Values with nothing to perturb come back unchanged.
    """
    task = TaskKind(task)
    if task.is_numeric:
        return value + 1 if value == 0 or rng.random() < 0.5 else value - 1
    if task is TaskKind.PROPERTY_CHECK:
        return not value
    if task is TaskKind.SORT_LAYERS:
        candidates = [i for i, layer in enumerate(value) if len(layer) >= 2]
        if not candidates:
            return value
        i = rng.choice(candidates)
        j = rng.randrange(len(value[i]) - 1)
        layers = [list(layer) for layer in value]
        layers[i][j], layers[i][j + 1] = layers[i][j + 1], layers[i][j]
        return layers
    if task is TaskKind.LAYER_ASSIGNMENT:
        movable = [n for n, r in value.items() if r is not None and r > 0]
        if not movable:
            return value
        node = rng.choice(movable)
        out = dict(value)
        out[node] = out[node] + (1 if rng.random() < 0.5 else -1)
        return out
    if isinstance(value, Graph):
        if not value.edges:
            return value
        drop = rng.randrange(len(value.edges))
        return value.with_edges(e for i, e in enumerate(value.edges) if i != drop)
    return value
