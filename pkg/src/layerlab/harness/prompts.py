"""Prompt templates, answer formats and ICL example sampling.

The four layout tasks reuse the exact wording the experiments were run
with; the utility tasks (generation, conversion, scene and SVG work) use
the same register. Every template family exposes the pieces the three
strategies need: the bare instruction, the steps scaffold, and the
``input``/``answer`` blocks used for in-context examples.
"""

from __future__ import annotations

import datetime as dt
import math
import random
from dataclasses import dataclass, field
from statistics import median
from typing import Any, Sequence

from ..formats import emit_dot, emit_edgelist, emit_graphml, emit_json_graph
from ..graph import Graph, NodeId
from ..layout import GridPositions, count_crossings_bipartite
from ..render import render_layout_svg
from .tasks import (
    ICL_K_RANGE,
    Strategy,
    TaskInstance,
    TaskKind,
    layered_graph,
    oracle_value,
    payload_graph,
    write_scene,
)

DEFAULT_CHAR_BUDGET = 24000  # largest 10-11 node prompt (5 SVG examples) is about 21k


class PromptBudgetError(ValueError):
    """Rendered prompt exceeds the configured character ceiling."""


class InsufficientPoolError(ValueError):
    """Too few other instances to draw the requested ICL examples from."""


@dataclass(frozen=True)
class PromptSpec:
    id: str
    task: TaskKind
    strategy: Strategy
    instance_id: str
    graph_id: str
    text: str
    seed: int
    payload: dict
    icl_example_ids: tuple[str, ...] = ()
    icl_answers: tuple[str, ...] = field(default=(), repr=False)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "task": self.task.value,
            "strategy": str(self.strategy),
            "instance_id": self.instance_id,
            "graph_id": self.graph_id,
            "seed": self.seed,
            "icl_example_ids": list(self.icl_example_ids),
            "icl_answers": list(self.icl_answers),
            "payload": self.payload,
            "text": self.text,
        }

    @classmethod
    def from_json(cls, data: dict) -> PromptSpec:
        return cls(
            id=data["id"],
            task=TaskKind(data["task"]),
            strategy=Strategy.parse(data["strategy"]),
            instance_id=data["instance_id"],
            graph_id=data.get("graph_id", ""),
            text=data["text"],
            seed=data["seed"],
            payload=data["payload"],
            icl_example_ids=tuple(data.get("icl_example_ids", ())),
            icl_answers=tuple(data.get("icl_answers", ())),
        )


# -- small renderers ----------------------------------------------------------


def tuple_list(edges: Sequence[Sequence[NodeId]]) -> str:
    return "[" + ", ".join(f"({s}, {t})" for s, t in edges) + "]"


def bracket_list(items: Sequence[NodeId]) -> str:
    return "[" + ", ".join(str(x) for x in items) + "]"


def layer_lines(layers: Sequence[Sequence[NodeId]]) -> str:
    return "\n".join(f"Layer {i}: {bracket_list(layer)}" for i, layer in enumerate(layers))


def _fmt_median(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else str(value)


# -- layer assignment ----------------------------------------------------------

_LA_INSTRUCTION = (
    "Perform a rank assignment on the graph. Use node {s} as a source for the graph. Each node must be assigned "
    "to a rank that is equal to the shortest path between that node and the source. Thus, node {s} will be "
    "assigned to rank 0, and the neighbors of node {s} will be assigned to rank 1."
)
_LA_FORMAT = (
    "Write no explanations, only respond with the id of each node and the rank it has been assigned to in a "
    "format <id> - <rank>."
)
_LA_STEPS = """You are a powerful algorithm for graph drawing. Your job is to answer questions regarding graphs. This is a list of directed edges in a graph::

edge_list: {edges}

Start from node {s}. Node {s} belongs to layer 0.

Find all the neighbors of node {s}. Assign all the neighbors of node {s} to layer number 1.
Then write the list of nodes belonging to layer 1 in a code block, one node per line, formatted as node: layer.

Find all neighbors of the nodes in layer 1 that do not already belong to a layer. Assign to them depth 2.
Then write the list of nodes belonging to layer 2, in a code block, one node per line, formatted as node: layer.

Find all neighbors of the nodes in layer 2 that do not already belong to a layer. Assign to them depth 3.
Then write the list of nodes belonging to layer 3 in a code block, one node per line, formatted as node: layer.

Find all neighbors of the nodes in layer 3 that do not already belong to a layer. Assign to them depth 4.
Then write the list of nodes belonging to layer 4 in a code block, one node per line, formatted as node: layer.

Find all neighbors of the nodes in layer 4 that do not already belong to a layer. Assign to them depth 5.
Then write the list of nodes belonging to layer 5 in a code block, one node per line, formatted as node: layer.

Repeat the process, incrementing the layer, until there are no more nodes that are not assigned to any layer
Write the final result in a code block, one node per line, formatted as node: layer."""


def _la_standard(p: dict) -> str:
    g = payload_graph(p)
    return f"{emit_edgelist(g, allow_lossy=True)}\n{_LA_INSTRUCTION.format(s=p['source'])}\n{_LA_FORMAT}"


def _la_steps(p: dict) -> str:
    g = payload_graph(p)
    return _LA_STEPS.format(edges=tuple_list(g.edge_pairs()), s=p["source"])


def _la_icl_header(p: dict) -> str:
    return f"{_LA_INSTRUCTION.format(s=p['source'])}\n{_LA_FORMAT}"


def _la_input(p: dict) -> str:
    return emit_edgelist(payload_graph(p), allow_lossy=True)


def _rank_text(r: int | None) -> str:
    return "unreachable" if r is None else str(r)


def _la_answer(value: dict, strategy: str, p: dict) -> str:
    if strategy != "steps":
        return "\n".join(f"{n} - {_rank_text(r)}" for n, r in value.items())
    by_layer: dict[int, list] = {}
    for n, r in value.items():
        if r is not None:
            by_layer.setdefault(r, []).append(n)
    parts = [f"Node {p['source']} belongs to layer 0."]
    for layer in sorted(by_layer):
        if layer == 0:
            continue
        block = "\n".join(f"{n}: {layer}" for n in by_layer[layer])
        parts.append(f"Layer {layer}:\n```\n{block}\n```")
    final = "\n".join(f"{n}: {_rank_text(r)}" for n, r in value.items())
    parts.append(f"Final result:\n```\n{final}\n```")
    return "\n\n".join(parts)


# -- sorting within layers ----------------------------------------------------------

_SORT_RULES = """Start from layer 0.
Consider every node in layer 0, and for each node consider its neighbors in the next layer.
For each node in layer 0, calculate the positions of the neighbors in the next layer.
Then, sort the nodes in layer 0 based on the median position of their neighbors.
If a number is NaN, then it is equal to 0.
If a node has no neighbors, assign an associated median of 0."""

_SORT_FINAL = """Finally, I want you to write the layers and the nodes in them once more, but the nodes in the layers have to be sorted according to their associated median value.
Like this:
Layer 0: [<sorted nodes in layer 0>]
If node A has an associated median value that is less than the associated median value of node B, then node A must come before node B."""

_SORT_STEPS_BODY = """Start from layer 0.
List every node in layer 0, and for each node list its neighbors in the next layer.
Like this:
Layer 0: [<node1>, <node2>, ...]
Neighbors of <node1>: [<neighbor1>, <neighbor2>, ...]

Then, for every one of the neighbors, write their index in their layer. So if node 6 belongs to layer 2 and is in the fourth position in layer 2, its index is 3.
Like this:
Index of <neighbor1>: <value>
And under each set of indices write the median of the indices.

Now I want you to start again from layer 0, and this time I want you to list the nodes in every layer and their associated medians.
Like this:
Layer 0:
<node 0> -> <median of the neighbors of node 0>

If a number is NaN, then it is equal to 0.
If a node has no neighbors, assign an associated median of 0.

"""


def _sort_head(p: dict) -> str:
    return (
        "This is a list of directed edges in a layered graph.\n"
        f"{tuple_list(p['edges'])}\n\n"
        f"This is the description of what nodes are contained in what layer:  {layer_lines(p['layers'])}\n\n"
    )


def _sort_standard(p: dict) -> str:
    return _sort_head(p) + "Write no code and no explanations.\n\n" + _SORT_RULES + "\n\nRepeat the process for every layer.\n\n" + _SORT_FINAL


def _sort_steps(p: dict) -> str:
    return (
        _sort_head(p)
        + _SORT_STEPS_BODY
        + _SORT_FINAL
        + "\nThis time, write no additional information other than the layers and the sorted nodes."
    )


def _sort_icl_header(p: dict) -> str:
    return (
        "We want to reduce edge crossings on a layered graph drawing.\n"
        "You are given a  list of directed edges in a layered graph, and a mapping of which nodes are contained in which layer.\n"
        + _SORT_RULES
        + "\nRepeat the process for every layer.\n"
        + _SORT_FINAL
    )


def _sort_input(p: dict) -> str:
    return f"Directed edges:\n{tuple_list(p['edges'])}\nLayer node mapping:\n{layer_lines(p['layers'])}\n"


def _sort_answer(value: list, strategy: str, p: dict) -> str:
    final = layer_lines(value)
    if strategy != "steps":
        return final
    g, lo = layered_graph(p)
    adj = g.neighbors()
    blocks = []
    for i, layer in enumerate(lo.layers):
        nxt = lo.layers[i + 1] if i + 1 < len(lo) else ()
        pos = {n: j for j, n in enumerate(nxt)}
        lines = [f"Layer {i}: {bracket_list(layer)}"]
        medians = []
        for n in layer:
            nbs = [nb for nb in adj[n] if nb in pos]
            lines.append(f"Neighbors of {n}: {bracket_list(nbs)}")
            medians.append(f"{n} -> {_fmt_median(median([pos[nb] for nb in nbs])) if nbs else 0}")
        blocks.append("\n".join(lines) + "\n" + "\n".join(medians))
    return "\n\n".join(blocks) + "\n\n" + final


# -- crossing counting --------------------------------------------------------

_CC_RULES = (
    "Two edges that share a source or a target can not cross. "
    "Two edges cross if the order of their sources is opposite to the order of their targets."
)

_CC_STEPS_TAIL = """VERY IMPORTANT: If there is a single edge, write 0 and stop writing!. If array A has length 1, write 0 and stop writing!. If array B has length 1, write 0 and stop writing!

Otherwise keep going and consider all the combinations of edge pairs.

Then, exclude all the pairs that have the same first element. Write the list.
Then, exclude all the pairs that have the same second element. Write the list again.

Now for every pair of edges left, consider the first one. Say that s1 is the index of its first element in A, and t1 is the index of its second element in B. Then consider the second edge. Say that s2 is the index of its first element in A, and t2 is the index of its second element in B.
Write down s1, t1, s2 and t2 for every pair, like this:
<pair> => s1 = <value>, t1 = <value>, s2 = <value>, t2 = <value>

Now exclude all the pairs for which s1 > s2 and t1 < t2. Write the list again.

Now exclude all the pairs for which s1 < s2 and t1 > t2. Write the list again.

Write the number of edges left as a number."""


def _cc_standard(p: dict) -> str:
    return (
        "Given the following arrays:\n"
        f"A: {bracket_list(p['a'])}\nB: {bracket_list(p['b'])}\n\n"
        "And the following list of tuples:\n"
        f"Tuples: {tuple_list(p['edges'])}\n\n"
        "Where for each tuple the first element of comes from array A, and the second element comes from array B.\n\n"
        f"Assuming this is a bipartite graph, count the edge crossings. {_CC_RULES}\n\n"
        "Exclude all edge crossings where edges have the same source or the same target.\n\n"
        "Write no explanations and no code. Return the pairs of edges that cross, one per line. "
        "There might be no edge crossings - in that case, return an empty list."
    )


def _cc_steps(p: dict) -> str:
    return (
        "You are a very advanced program that can help me with counting edge crossings in a bipartite graph. "
        "Write the answer to the following question.\n\n"
        "Given the following arrays:\n"
        f"A: {bracket_list(p['a'])}\nB: {bracket_list(p['b'])}\n\n"
        "And the following list of edges:\n"
        f"Tuples: {tuple_list(p['edges'])}\n\n"
        "Where for each edges the first element comes from array A, and the second element comes from array B.\n\n"
        + _CC_STEPS_TAIL
    )


def _cc_icl_header(p: dict) -> str:
    return (
        "You are a very advanced program that can help me with counting edge crossings in a bipartite graph.\n"
        "I will provide you with the arrays of nodes of layers A and B and a list of edges as tuples.\n"
        "For each edge the first element comes from array A, and the second element comes from array B.\n\n"
        "Assuming this is a bipartite graph, count the edge crossings.\n"
        "Two edges that share a source or a target can not cross.\n"
        "Two edges cross if the order of their sources is opposite to the order of their targets.\n\n"
        "Exclude all crossings where edges have the same source or the same target.\n\n"
        "Write no explanations and no code. Return the number of edges that cross. "
        "There might be no edge crossings - in that case, return 0."
    )


def _cc_input(p: dict) -> str:
    return (
        f"Layer arrays:\nA: {bracket_list(p['a'])}\nB: {bracket_list(p['b'])}\n"
        f"Edge tuples:\nTuples: {tuple_list(p['edges'])}\n"
    )


def _cc_answer(value: int, strategy: str, p: dict) -> str:
    if strategy == "standard":
        report = count_crossings_bipartite(p["a"], p["b"], [tuple(e) for e in p["edges"]], with_pairs=True)
        pairs = list(report.pairs)
        if len(pairs) != value and p["edges"]:
            # a perturbed count: trim, or pad by repeating an edge, so the line count carries the value
            filler = (tuple(p["edges"][0]), tuple(p["edges"][-1]))
            pairs = (pairs + [filler] * value)[:value]
        if not pairs:
            return "[]"
        return "\n".join(f"({a[0]}, {a[1]}) and ({b[0]}, {b[1]})" for a, b in pairs)
    if strategy == "steps":
        return (
            f"There are {len(p['edges'])} edges, array A has {len(p['a'])} elements and array B has {len(p['b'])} elements.\n"
            "After excluding the pairs that share an element and the pairs that do not invert their order, "
            f"the number of edges left is {value}.\n\n{value}"
        )
    return str(value)


# -- edge length --------------------------------------------------------------

_EL_RULE = (
    "The edge length of each edge e is always equal to the absolute value of the number of the layer the target "
    "is contained in, minus the number of the layer the source is contained in."
)


def _el_head(p: dict) -> str:
    return (
        "The following is the description of a layered graph.\n"
        "A layered graph is a graph where each node is contained in a single layer.\n"
        "The following is the list of directed edges, formatted as [(<source_id>, <target_id>)].\n\n"
        f"edge_list: {tuple_list(p['edges'])}\n\n"
        "The second is a mapping of layers to the nodes contained within. Every array is a different layer, "
        "and the numbers in every array indicate the nodes in that layer.\n\n"
        f"{layer_lines(p['layers'])}\n\n"
        f"Count the total edge length. {_EL_RULE} The edge length can't be negative.\n\n"
    )


def _el_standard(p: dict) -> str:
    return _el_head(p) + "Write no explanations and no code. Return the total sum of the lengths."


def _el_steps(p: dict) -> str:
    return _el_head(p) + (
        "First, for each edge, write the layer of the source node and the layer of the target node.\n"
        "Then, write each edge and its associated length.\n"
        "In the end, write the total sum of the lengths.\n"
        "Write the final sum in a separate line at the end."
    )


def _el_icl_header(p: dict) -> str:
    return (
        "A layered graph is a graph where each node is contained in a single layer.\n"
        "A layered graph is described by list of directed edges, formatted as [(<source_id>, <target_id>)], "
        "and a mapping of layers to the nodes contained within.\n"
        "Every array in the mapping is a different layer, and the numbers in every array indicate the nodes in that layer.\n\n"
        "Count the total edge length.\n"
        f"{_EL_RULE}\n"
        "The edge length can't be negative.\n\n"
        "Write no explanations and no code. Return the total sum of the lengths."
    )


def _el_input(p: dict) -> str:
    return (
        "List of edges formatted as [<source_id>, <target_id>]:\n"
        f"edges = {tuple_list(p['edges'])}\n"
        f"Mapping of layers to nodes:\nranks = {layer_lines(p['layers'])}"
    )


def _el_answer(value: int, strategy: str, p: dict) -> str:
    if strategy != "steps":
        return str(value)
    g, lo = layered_graph(p)
    layer_of = lo.layer_of()
    lines = ["The layer of the source node and the layer of the target node for each edge are:", ""]
    lines += [f"({s}, {t}) -> Layer {layer_of[s]} to Layer {layer_of[t]}" for s, t in g.edge_pairs()]
    lines += ["", "The associated length for each edge is:", ""]
    lengths = [abs(layer_of[t] - layer_of[s]) for s, t in g.edge_pairs()]
    lines += [f"({s}, {t}) -> |{layer_of[t]} - {layer_of[s]}| = {n}" for (s, t), n in zip(g.edge_pairs(), lengths)]
    lines += ["", f"Therefore, the final sum is {value}."]
    return "\n".join(lines)


# -- utility tasks -------------------------------------------------------------

_STEPS_SUFFIX = "Think about it step by step and write down every step of your reasoning before the final answer."
_SUPPRESS = "Write no explanations."


def _long_date(d: str) -> str:
    day = dt.date.fromisoformat(d)
    return f"{day:%B} {day.day}, {day.year}"


def _gen_request(p: dict) -> str:
    text = (
        "Generate a graph for me. Write no explanations, exclusively write the json representation of the graph. "
        f"I want the graph to have {p['n']} nodes and {p['m']} edges."
    )
    if p.get("timestamp_range"):
        first, last = p["timestamp_range"]
        text += f" I want every node to have a timestamp from {_long_date(first)} to {_long_date(last)}."
    if p.get("weight_above") is not None:
        text += f" I want every edge to have a weight associated with it, which must be higher than {p['weight_above']:g}."
    return text


def _conv_request(p: dict) -> str:
    g = payload_graph(p)
    return (
        "Convert the following graph from GraphML to an edge list, using this format:\n"
        "Graph G has <number of nodes> nodes, numbered from <first id> to <last id>. Graph G has <number of edges> edges.\n"
        "This is the list of edge connections:\n"
        "[<source node id>, <target node id>]\n\n"
        f"```xml\n{emit_graphml(g, allow_lossy=True)}```"
    )


def _node_phrase(ids: list) -> str:
    if len(ids) == 1:
        return str(ids[0])
    return ", ".join(str(i) for i in ids[:-1]) + f" and {ids[-1]}"


def _prop_request(p: dict) -> str:
    g = payload_graph(p)
    if p["property"] == "bulbaceous":
        return (
            "A graph is bulbaceous if its number of edges is a multiple of its number of nodes.\n\n"
            f"Graph G has {g.num_nodes} nodes and {g.num_edges} edges.\n\n"
            "Is graph G bulbaceous?"
        )
    edges = " ".join(f"({s}, {t})" for s, t in g.edge_pairs())
    return (
        "A graph is flamboyous if there are no two edges connecting the same set of nodes.\n\n"
        f"Graph G has {g.num_nodes} nodes ({_node_phrase(g.node_ids)}) and {g.num_edges} edges.\n"
        f"The edges of G are: {edges}\n\n"
        "Is graph G flamboyous?"
    )


def _scene_request(p: dict) -> str:
    return (
        "I am going to give you a description of a short scene, and I would like you to provide me with a DOT graph "
        "representation in a code block where each person in the scene is a node, and whenever two characters "
        f"interact there is an edge between them:\n\n{p['scene']}"
    )


def _from_graph_request(p: dict) -> str:
    dot = emit_dot(payload_graph(p), allow_lossy=True, name="scene")
    return (
        "I am going to give you a DOT graph format where each node is a person, and each edge represents that these "
        "people interacted in some way, such as chatting, having a meeting, working together, or something. I want "
        "you to write a short description of a day at the office that reproduces the topology of the graph:\n\n"
        f"{dot.rstrip()}"
    )


def _svg_request(p: dict) -> str:
    dot = emit_dot(payload_graph(p), allow_lossy=True, name="scene")
    return (
        "Translate the following DOT graph into an SVG drawing. Draw every node as a circle with its name as a label "
        "and every edge as a line between the two circles. Write no explanations, only the SVG code in a code block.\n\n"
        f"{dot.rstrip()}"
    )


def circular_svg(g: Graph) -> str:
    """SVG of ``g`` with nodes on a circle (no three centers collinear for n >= 3)."""
    n = max(g.num_nodes, 1)
    pos = {
        node: (round(150 + 120 * math.cos(2 * math.pi * i / n), 2), round(150 + 120 * math.sin(2 * math.pi * i / n), 2))
        for i, node in enumerate(g.node_ids)
    }
    return render_layout_svg(g, GridPositions(pos)).text


def _graph_answer(value: Graph, fmt: str) -> str:
    if fmt == "json":
        return f"```json\n{emit_json_graph(value)}\n```"
    if fmt == "edgelist":
        return f"```\n{emit_edgelist(value, allow_lossy=True)}\n```"
    return f"```dot\n{emit_dot(value, allow_lossy=True, name='scene')}```"


def _scene_answer(value: Graph) -> str:
    return write_scene(value)


@dataclass(frozen=True)
class _Family:
    standard: Any
    steps: Any
    icl_header: Any
    icl_input: Any
    answer: Any
    icl_marker: str = "## "


def _utility(request, answer, suppress: bool = False) -> _Family:
    return _Family(
        standard=(lambda p: f"{request(p)}\n\n{_SUPPRESS}") if suppress else request,
        steps=lambda p: f"{request(p)}\n\n{_STEPS_SUFFIX}",
        icl_header=lambda p: "Here are some solved examples of the task, followed by a new instance to solve.",
        icl_input=lambda p: request(p) + "\n",
        answer=answer,
    )


FAMILIES: dict[TaskKind, _Family] = {
    TaskKind.LAYER_ASSIGNMENT: _Family(_la_standard, _la_steps, _la_icl_header, _la_input, _la_answer, icl_marker=""),
    TaskKind.SORT_LAYERS: _Family(_sort_standard, _sort_steps, _sort_icl_header, _sort_input, _sort_answer),
    TaskKind.COUNT_CROSSINGS: _Family(_cc_standard, _cc_steps, _cc_icl_header, _cc_input, _cc_answer),
    TaskKind.EDGE_LENGTH: _Family(_el_standard, _el_steps, _el_icl_header, _el_input, _el_answer),
    TaskKind.GRAPH_GENERATION: _utility(_gen_request, lambda v, s, p: _graph_answer(v, "json")),
    TaskKind.FORMAT_CONVERSION: _utility(_conv_request, lambda v, s, p: _graph_answer(v, "edgelist"), suppress=True),
    TaskKind.PROPERTY_CHECK: _utility(_prop_request, lambda v, s, p: "Yes." if v else "No.", suppress=True),
    TaskKind.GRAPH_FROM_SCENE: _utility(_scene_request, lambda v, s, p: _graph_answer(v, "dot")),
    TaskKind.SCENE_FROM_GRAPH: _utility(_from_graph_request, lambda v, s, p: _scene_answer(v)),
    TaskKind.SVG_FROM_DOT: _utility(_svg_request, lambda v, s, p: f"```svg\n{circular_svg(v)}```"),
}


def format_answer(task: TaskKind, strategy: Strategy | str, payload: dict, value: Any = None) -> str:
    """Render ``value`` (default: the oracle's) in the task's answer format."""
    task = TaskKind(task)
    kind = strategy.kind if isinstance(strategy, Strategy) else Strategy.parse(strategy).kind
    if value is None:
        value = oracle_value(task, payload)
    return FAMILIES[task].answer(value, kind, payload)


def oracle_answer(task: TaskKind, strategy: Strategy | str, payload: dict) -> str:
    return format_answer(task, strategy, payload, oracle_value(task, payload))


def icl_example_answer(task: TaskKind, payload: dict) -> str:
    """Answer text embedded after an example in an ICL prompt."""
    return format_answer(task, "icl", payload)


def render_prompt(
    task: TaskKind,
    strategy: Strategy | str,
    payload: dict,
    examples: Sequence[TaskInstance] = (),
    answers: Sequence[str] | None = None,
) -> tuple[str, tuple[str, ...]]:
    """Instantiate the template; returns the text and the example answers used.

    Example answers default to the oracle's; ``answers`` overrides them.
    """
    task = TaskKind(task)
    strategy = strategy if isinstance(strategy, Strategy) else Strategy.parse(strategy)
    fam = FAMILIES[task]
    if strategy.kind == "standard":
        return fam.standard(payload), ()
    if strategy.kind == "steps":
        return fam.steps(payload), ()
    mark = fam.icl_marker
    if answers is None:
        answers = tuple(icl_example_answer(task, ex.payload) for ex in examples)
    elif len(answers) != len(examples):
        raise ValueError("need one answer per example")
    answers = tuple(answers)
    blocks = [fam.icl_header(payload)]
    for ex, ans in zip(examples, answers):
        blocks.append(f"{mark}Input:\n{fam.icl_input(ex.payload).rstrip()}\n{_answer_sep(task)}{mark}Answer:\n{ans}")
    blocks.append(f"{mark}Input:\n{fam.icl_input(payload).rstrip()}\n{_answer_sep(task)}{mark}Answer:")
    return "\n\n".join(blocks), answers


def _answer_sep(task: TaskKind) -> str:
    # the sorting and crossing pools leave a blank line before the answer marker
    return "\n" if task in (TaskKind.SORT_LAYERS, TaskKind.COUNT_CROSSINGS) else ""


def sample_icl_examples(
    pool: Sequence[TaskInstance],
    k: int,
    exclude: str,
    seed: int | str,
) -> list[TaskInstance]:
    """Draw ``k`` distinct pool members other than ``exclude``."""
    candidates = [ex for ex in pool if ex.id != exclude]
    if len({ex.id for ex in candidates}) != len(candidates):
        raise ValueError("example pool contains duplicate instance ids")
    if len(candidates) < k:
        raise InsufficientPoolError(f"need {k} examples besides {exclude!r}, pool has {len(candidates)}")
    rng = random.Random(f"icl:{seed}:{exclude}")
    return rng.sample(candidates, k)


def build_prompt(
    task: TaskKind | str,
    strategy: Strategy | str,
    instance: TaskInstance,
    pool: Sequence[TaskInstance] = (),
    seed: int = 0,
    char_budget: int | None = DEFAULT_CHAR_BUDGET,
) -> PromptSpec:
    task = TaskKind(task)
    strategy = strategy if isinstance(strategy, Strategy) else Strategy.parse(strategy)
    if instance.task is not task:
        raise ValueError(f"instance {instance.id!r} belongs to {instance.task.value}, not {task.value}")
    examples: list[TaskInstance] = []
    if strategy.kind == "icl":
        k = strategy.k
        if k is None:
            k = random.Random(f"k:{seed}:{instance.id}").randint(*ICL_K_RANGE)
        examples = sample_icl_examples([ex for ex in pool if ex.task is task], k, instance.id, seed)
    text, answers = render_prompt(task, strategy, instance.payload, examples)
    if char_budget is not None and len(text) > char_budget:
        raise PromptBudgetError(f"prompt for {instance.id!r} has {len(text)} characters, budget is {char_budget}")
    return PromptSpec(
        id=f"{task.value}:{strategy.kind}:{instance.id}:{seed}",
        task=task,
        strategy=strategy,
        instance_id=instance.id,
        graph_id=instance.graph_id,
        text=text,
        seed=seed,
        payload=instance.payload,
        icl_example_ids=tuple(ex.id for ex in examples),
        icl_answers=answers,
    )
