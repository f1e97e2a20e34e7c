"""Compare parsed answers with ground truth."""

from __future__ import annotations

import datetime as dt
from collections import Counter
from typing import Any

from ..formats import graph_from_dict
from ..graph import Graph, NodeId
from ..layout import LayeredOrdering, count_crossings_total, is_valid_layering
from .outcomes import Delta, Malformed, OutcomeKind, ScoreOutcome
from .parsing import NON_PERMUTATION, SvgSummary
from .tasks import TaskKind, layered_graph


class ScoreTypeError(TypeError):
    """Parsed value and truth do not have the shapes the task expects."""


def _numeric(parsed: Any, truth: Any) -> ScoreOutcome:
    if isinstance(parsed, bool) or not isinstance(parsed, (int, float)):
        raise ScoreTypeError(f"expected a number, got {type(parsed).__name__}")
    if parsed == truth:
        return ScoreOutcome.correct()
    kind = OutcomeKind.INCORRECT_OVER if parsed > truth else OutcomeKind.INCORRECT_UNDER
    return ScoreOutcome(kind, abs_error=abs(parsed - truth))


def _normalize_key(node: Any) -> Any:
    if isinstance(node, str) and node.isdigit():
        return int(node)
    return node


def score_layer_assignment(parsed: dict, truth: dict) -> ScoreOutcome:
    if not isinstance(parsed, dict):
        raise ScoreTypeError("layer assignment answers are node -> rank maps")
    expected: dict[NodeId, int | None] = {n: r for n, r in truth["ranks"]}
    expected.update({n: None for n in truth["unreachable"]})
    got = {_normalize_key(k): v for k, v in parsed.items()}
    hits = sum(1 for n, r in expected.items() if n in got and got[n] == r)
    fraction = hits / len(expected) if expected else 1.0
    # validity is judged on the part of the graph reachable from the source
    g = graph_from_dict(truth["graph"])
    reachable = [n for n in g.node_ids if expected.get(n) is not None]
    inside = set(reachable)
    sub = Graph.from_edges(
        [(e.source, e.target) for e in g.edges if e.source in inside and e.target in inside],
        nodes=reachable,
    )
    claimed = {n: r for n, r in got.items() if r is not None}
    valid = set(claimed) == inside and is_valid_layering(sub, claimed, truth["source"])
    return ScoreOutcome.partial(fraction, valid=valid)


def score_sort_layers(parsed: list, truth: dict) -> ScoreOutcome:
    if not isinstance(parsed, list):
        raise ScoreTypeError("sorted layers are a list of lists")
    original = [list(layer) for layer in truth["layers"]]
    got = [[_normalize_key(n) for n in layer] for layer in parsed]
    if len(got) != len(original) or any(Counter(a) != Counter(b) for a, b in zip(got, original)):
        return ScoreOutcome.malformed(NON_PERMUTATION)
    g, _ = layered_graph({"layers": original, "edges": truth["edges"]})
    after = count_crossings_total(LayeredOrdering(got), g).total
    before = truth["crossings"]
    delta = Delta.FEWER if after < before else Delta.EQUAL if after == before else Delta.MORE
    return ScoreOutcome.ordering(delta, exact=got == truth["oracle"])


def score_property(parsed: bool, truth: bool) -> ScoreOutcome:
    if not isinstance(parsed, bool):
        raise ScoreTypeError("property answers are booleans")
    if parsed == truth:
        return ScoreOutcome.correct()
    return ScoreOutcome(OutcomeKind.INCORRECT_OVER if parsed else OutcomeKind.INCORRECT_UNDER)


def _undirected_pairs(g: Graph) -> set[frozenset]:
    return {e.pair for e in g.edges if not e.is_loop}


def score_scene_graph(parsed: Graph, truth: Graph) -> ScoreOutcome:
    """Correct when the undirected simple topologies coincide under the names.

    Anything else scores the share of truth edges the answer recovered.
    """
    if not isinstance(parsed, Graph) or not isinstance(truth, Graph):
        raise ScoreTypeError("scene answers are graphs")
    want = _undirected_pairs(truth)
    got = _undirected_pairs(parsed)
    if got == want and set(parsed.node_ids) == set(truth.node_ids):
        return ScoreOutcome.correct()
    return ScoreOutcome.partial(len(want & got) / len(want) if want else 0.0)


def score_graph_generation(parsed: Graph, constraints: dict) -> ScoreOutcome:
    """Share of the requested constraints the generated graph meets."""
    if not isinstance(parsed, Graph):
        raise ScoreTypeError("generated graphs are graphs")
    checks = [parsed.num_nodes == constraints["n"], parsed.num_edges == constraints["m"]]
    if constraints.get("timestamp_range"):
        first, last = (dt.date.fromisoformat(d) for d in constraints["timestamp_range"])
        checks.append(all(n.timestamp is not None and first <= n.timestamp <= last for n in parsed.nodes))
    if constraints.get("weight_above") is not None:
        bound = constraints["weight_above"]
        checks.append(all(e.weight is not None and e.weight > bound for e in parsed.edges))
    if all(checks):
        return ScoreOutcome.correct()
    return ScoreOutcome.partial(sum(checks) / len(checks))


def score_format_conversion(parsed: Graph, truth: Graph) -> ScoreOutcome:
    if not isinstance(parsed, Graph):
        raise ScoreTypeError("converted graphs are graphs")
    want, got = truth.edge_multiset(), parsed.edge_multiset()
    if want == got and set(parsed.node_ids) == set(truth.node_ids):
        return ScoreOutcome.correct()
    total = sum(want.values())
    return ScoreOutcome.partial(sum((want & got).values()) / total if total else 0.0)


def score_svg(parsed: SvgSummary, truth: Graph) -> ScoreOutcome:
    """Structural check only: one shape per node and at least one stroke per edge."""
    if not isinstance(parsed, SvgSummary):
        raise ScoreTypeError("SVG answers are SvgSummary values")
    if parsed.node_count == truth.num_nodes and parsed.edge_count >= truth.num_edges:
        return ScoreOutcome.correct(warnings=parsed.warnings)
    if parsed.node_count > truth.num_nodes:
        kind = OutcomeKind.INCORRECT_OVER
    else:
        kind = OutcomeKind.INCORRECT_UNDER
    return ScoreOutcome(kind, warnings=parsed.warnings)


def score(task: TaskKind | str, parsed: Any, truth: Any) -> ScoreOutcome:
    """Score a parsed answer against the task's ground-truth record."""
    task = TaskKind(task)
    if isinstance(parsed, Malformed):
        return ScoreOutcome.malformed(parsed.reason)
    if task.is_numeric:
        return _numeric(parsed, truth)
    if task is TaskKind.LAYER_ASSIGNMENT:
        return score_layer_assignment(parsed, truth)
    if task is TaskKind.SORT_LAYERS:
        return score_sort_layers(parsed, truth)
    if task is TaskKind.PROPERTY_CHECK:
        return score_property(parsed, truth)
    if task is TaskKind.GRAPH_GENERATION:
        return score_graph_generation(parsed, truth)
    truth_graph = truth if isinstance(truth, Graph) else graph_from_dict(truth)
    if task is TaskKind.FORMAT_CONVERSION:
        return score_format_conversion(parsed, truth_graph)
    if task is TaskKind.SVG_FROM_DOT:
        return score_svg(parsed, truth_graph)
    return score_scene_graph(parsed, truth_graph)
