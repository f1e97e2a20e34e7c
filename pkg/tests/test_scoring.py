import pytest

from layerlab.formats import graph_to_dict
from layerlab.generate import random_connected_graph
from layerlab.graph import Graph
from layerlab.harness.outcomes import Delta, Malformed, OutcomeKind, ScoreOutcome, ratio_bucket
from layerlab.harness.parsing import SvgSummary, parse_response
from layerlab.harness.scoring import (
    ScoreTypeError,
    score,
    score_graph_generation,
    score_scene_graph,
    score_svg,
)
from layerlab.harness.tasks import TaskKind as T, ground_truth, oracle_value

from . import paper_cases as pc
from .conftest import paper_text

K = OutcomeKind


def _score_fixture(task, name, payload, expected_nodes=None):
    parsed = parse_response(task, paper_text(f"{name}.answer"), expected_nodes)
    return score(task, parsed, ground_truth(task, payload))


@pytest.mark.parametrize(
    "name, payload, kind, error",
    [
        ("count_crossings_standard", pc.CC, K.INCORRECT_OVER, 1),
        ("count_crossings_steps", pc.CC, K.CORRECT, None),
        ("count_crossings_icl", pc.CC, K.INCORRECT_OVER, 1),
        ("edge_length_standard", pc.EL, K.INCORRECT_OVER, 10),
        ("edge_length_steps", pc.EL, K.INCORRECT_UNDER, 2),
        ("edge_length_icl", pc.EL, K.INCORRECT_UNDER, 5),
    ],
)
def test_numeric_fixture_scores(name, payload, kind, error):
    task = T.COUNT_CROSSINGS if name.startswith("count") else T.EDGE_LENGTH
    out = _score_fixture(task, name, payload)
    assert out.kind is kind
    assert out.abs_error == error


def test_layer_assignment_fixture_is_a_fifth_right():
    out = _score_fixture(T.LAYER_ASSIGNMENT, "layer_assignment_icl", pc.LA, range(10))
    assert out.kind is K.PARTIAL_RATIO
    assert out.fraction == pytest.approx(0.2)
    assert out.label() == "0-25%"
    assert out.valid is False


def test_layer_assignment_oracle_is_valid_and_complete():
    truth = ground_truth(T.LAYER_ASSIGNMENT, pc.LA)
    out = score(T.LAYER_ASSIGNMENT, oracle_value(T.LAYER_ASSIGNMENT, pc.LA), truth)
    assert out.fraction == 1.0 and out.valid and out.is_correct


def test_layer_assignment_with_unreachable_nodes():
    payload = {"graph": graph_to_dict(Graph.from_edges([(0, 1)], nodes=[0, 1, 2])), "source": 0}
    truth = ground_truth(T.LAYER_ASSIGNMENT, payload)
    assert score(T.LAYER_ASSIGNMENT, {0: 0, 1: 1, 2: None}, truth).fraction == 1.0
    half = score(T.LAYER_ASSIGNMENT, {"0": 0, "1": 1, "2": 1}, truth)
    assert half.fraction == pytest.approx(2 / 3)
    assert half.valid is False


def test_sort_layers_scoring():
    truth = ground_truth(T.SORT_LAYERS, pc.SORT)
    oracle = score(T.SORT_LAYERS, truth["oracle"], truth)
    assert oracle.exact and oracle.is_correct
    same = score(T.SORT_LAYERS, pc.SORT["layers"], truth)
    assert same.delta is Delta.EQUAL and not same.exact
    bad = score(T.SORT_LAYERS, [[0], [1], [6, 8, 2]], truth)
    assert bad == ScoreOutcome.malformed("non-permutation")


def test_sort_layers_published_answers():
    for name in ("sort_layers_standard", "sort_layers_steps", "sort_layers_icl"):
        out = _score_fixture(T.SORT_LAYERS, name, pc.SORT)
        assert out.kind is K.ORDERING_DELTA
        assert out.exact is False


def test_sort_intro_answer_agrees_on_layer_one_only():
    payload = {"edges": [list(e) for e in pc.ORDER_EDGES], "layers": pc.ORDER_LAYERS}
    answer = parse_response(T.SORT_LAYERS, paper_text("sort_layers_intro.answer"))
    assert answer[1] == oracle_value(T.SORT_LAYERS, payload)[1] == [3, 1]
    # its layer 2 is reshuffled against the rule, which costs two crossings
    out = _score_fixture(T.SORT_LAYERS, "sort_layers_intro", payload)
    assert out.delta is Delta.MORE and not out.exact


def test_property_mismatches():
    assert score(T.PROPERTY_CHECK, True, True).is_correct
    assert score(T.PROPERTY_CHECK, True, False).kind is K.INCORRECT_OVER
    assert score(T.PROPERTY_CHECK, False, True).kind is K.INCORRECT_UNDER
    with pytest.raises(ScoreTypeError):
        score(T.PROPERTY_CHECK, "yes", True)


def test_scene_scoring_is_undirected():
    directed = parse_response(T.GRAPH_FROM_SCENE, paper_text("graph_from_scene_directed.answer"))
    assert score_scene_graph(directed, pc.SCENE_GRAPH).is_correct
    weighted = parse_response(T.GRAPH_FROM_SCENE, paper_text("graph_from_scene_weighted.answer"))
    # the weighted variant swaps Claire-Ed for Bob-Claire
    out = score(T.GRAPH_FROM_SCENE, weighted, graph_to_dict(pc.SCENE_GRAPH))
    assert out.fraction == pytest.approx(5 / 6)
    fewer = Graph.from_edges(pc.SCENE_EDGES[:-1], nodes=pc.SCENE_GRAPH.node_ids, directed=False)
    out = score_scene_graph(fewer, pc.SCENE_GRAPH)
    assert out.fraction == pytest.approx(5 / 6)


def test_graph_generation_constraints():
    c = {"n": 5, "m": 7, "timestamp_range": ["1970-01-01", "1970-12-31"], "weight_above": 2}
    attrs = parse_response(T.GRAPH_GENERATION, paper_text("graph_generation_attrs.answer"))
    assert score_graph_generation(attrs, c).is_correct
    plain = parse_response(T.GRAPH_GENERATION, paper_text("graph_generation_plain.answer"))
    assert score_graph_generation(plain, {"n": 5, "m": 7}).is_correct
    out = score_graph_generation(plain, c)
    assert out.fraction == pytest.approx(0.5)


def test_format_conversion_multiset():
    g = Graph.from_edges([(0, 1), (0, 1), (1, 2)])
    assert score(T.FORMAT_CONVERSION, g, graph_to_dict(g)).is_correct
    missing = Graph.from_edges([(0, 1), (1, 2)], nodes=[0, 1, 2])
    assert score(T.FORMAT_CONVERSION, missing, g).fraction == pytest.approx(2 / 3)


def test_svg_structure():
    g = Graph.from_edges([(0, 1), (1, 2)])
    assert score_svg(SvgSummary(3, 2, ()), g).is_correct
    assert score_svg(SvgSummary(4, 2, ()), g).kind is K.INCORRECT_OVER
    assert score_svg(SvgSummary(3, 1, ()), g).kind is K.INCORRECT_UNDER
    assert score_svg(SvgSummary(3, 2, (), ("w",)), g).warnings == ("w",)


def test_malformed_passes_through_and_types_are_checked():
    assert score(T.EDGE_LENGTH, Malformed("no-answer"), 3).reason == "no-answer"
    with pytest.raises(ScoreTypeError):
        score(T.EDGE_LENGTH, True, 3)
    with pytest.raises(ScoreTypeError):
        score(T.SORT_LAYERS, "Layer 0", {})


def test_oracle_answers_score_correct_for_every_task():
    g = random_connected_graph(10, 14, seed=5)
    from layerlab.harness.tasks import make_instances

    for task in T:
        for inst in make_instances(task, "g", g):
            truth = ground_truth(task, inst.payload)
            out = score(task, oracle_value(task, inst.payload), truth) if task not in (
                T.SVG_FROM_DOT, T.SCENE_FROM_GRAPH
            ) else None
            if out is not None:
                assert out.is_correct, (task, out)


def test_outcome_json_and_buckets():
    out = ScoreOutcome.ordering("fewer", exact=False)
    assert ScoreOutcome.from_json(out.to_json()) == out
    assert [ratio_bucket(x) for x in (0, 0.25, 0.5, 0.75, 0.99, 1)] == [
        "0-25%", "25-50%", "50-75%", "75-99%", "75-99%", "100%"
    ]
    with pytest.raises(ValueError):
        ScoreOutcome.partial(1.5)
    assert not Malformed("x")
