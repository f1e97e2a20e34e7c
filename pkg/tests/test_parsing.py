import pytest

from layerlab.harness.outcomes import Malformed
from layerlab.harness.parsing import (
    SvgSummary,
    expected_nodes_for,
    extract_dot,
    extract_json,
    final_integer,
    parse_crossing_answer,
    parse_layer_lines,
    parse_rank_lines,
    parse_response,
    parse_scene_text,
    parse_svg_answer,
    parse_yes_no,
)
from layerlab.harness.tasks import TaskKind as T

from . import paper_cases as pc
from .conftest import paper_text


@pytest.mark.parametrize(
    "name, task, expected",
    [
        ("count_crossings_standard", T.COUNT_CROSSINGS, 2),
        ("count_crossings_steps", T.COUNT_CROSSINGS, 1),
        ("count_crossings_icl", T.COUNT_CROSSINGS, 2),
        ("edge_length_standard", T.EDGE_LENGTH, 30),
        ("edge_length_steps", T.EDGE_LENGTH, 18),
        ("edge_length_icl", T.EDGE_LENGTH, 15),
        ("bulbaceous_1", T.PROPERTY_CHECK, True),
        ("bulbaceous_2", T.PROPERTY_CHECK, True),
        ("flamboyous_1", T.PROPERTY_CHECK, False),
        ("flamboyous_2", T.PROPERTY_CHECK, True),
        ("sort_layers_standard", T.SORT_LAYERS, [[0], [1], [8, 6, 2, 9], [7, 5, 4, 3], [10]]),
        ("sort_layers_steps", T.SORT_LAYERS, [[0], [1], [8, 6, 2, 9], [5, 3, 4, 7], [10]]),
        ("sort_layers_intro", T.SORT_LAYERS, [[0], [3, 1], [7, 6, 8, 9, 2, 4], [5]]),
    ],
)
def test_published_answers(name, task, expected):
    assert parse_response(task, paper_text(f"{name}.answer")) == expected


def test_layer_assignment_answers():
    got = parse_response(T.LAYER_ASSIGNMENT, paper_text("layer_assignment_icl.answer"), range(10))
    assert got == {0: 1, 5: 1, 6: 1, 2: 2, 7: 2, 1: 2, 8: 3, 9: 3, 4: 3, 3: 4}
    # the step-by-step answer restates partial blocks; the final full one wins
    steps = parse_response(T.LAYER_ASSIGNMENT, paper_text("layer_assignment_steps.answer"), range(10))
    assert len(steps) == 10


def test_rank_lines_prefer_complete_blocks():
    text = "0 - 0\n1 - 1\n2 - 1\n\nso in the end\n\n0 - 0\n1 - 1"
    assert parse_rank_lines(text) == {0: 0, 1: 1}
    assert parse_rank_lines(text, [0, 1, 2]) == {0: 0, 1: 1, 2: 1}
    assert parse_rank_lines("3 -> unreachable\n4: 2") == {3: None, 4: 2}
    assert parse_rank_lines("0 - 0\n0 - 1") == Malformed("duplicate-node")
    assert parse_rank_lines("no ranks here") == Malformed("no-block")


def test_layer_lines_take_the_last_full_run():
    text = "Layer 0: [0]\nLayer 1: [2, 1]\nthinking...\nLayer 0: [0]\nLayer 1: [1, 2]"
    assert parse_layer_lines(text) == [[0], [1, 2]]
    assert parse_layer_lines("Layer 0: [0, 0]") == Malformed("duplicate-node")
    assert parse_layer_lines("Layer 0: [0, (1)]") == Malformed("non-permutation")
    assert parse_layer_lines("Layer 3: [1]") == Malformed("no-block")
    assert parse_layer_lines("Layer 0: []\nLayer 1: [1]") == [[], [1]]


@pytest.mark.parametrize(
    "text, expected",
    [
        ("The answer is 12.", 12),
        ("3 crossings, total 4", 4),
        ("4.0", 4),
        ("about 4.5", Malformed("non-numeric")),
        ("none at all", Malformed("no-answer")),
        ("x2 and v3", Malformed("no-answer")),
    ],
)
def test_final_integer(text, expected):
    assert final_integer(text) == expected


@pytest.mark.parametrize(
    "text, expected",
    [
        ("[]", 0),
        ("There are no crossings.", 0),
        ("(1, 2) and (3, 4)\n(5, 6) and (7, 8)", 2),
        ("- (a, b), (c, d)", 1),
        ("I count 3 crossings", 3),
        ("```\n(1, 2) and (3, 4)\n```", 1),
    ],
)
def test_crossing_answers(text, expected):
    assert parse_crossing_answer(text) == expected


def test_yes_no_last_wins():
    assert parse_yes_no("No, wait. Yes.") is True
    assert parse_yes_no("Yes... actually no") is False
    assert parse_yes_no("Nobody knows") == Malformed("no-answer")


def test_block_extraction():
    assert extract_dot("text\n```dot\ngraph { a -- b; }\n```\nmore") == "graph { a -- b; }"
    assert extract_dot("graph G { a -- b; } and prose") == "graph G { a -- b; }"
    assert extract_dot("nothing") is None
    assert extract_json('see {"nodes": [], "edges": []} there') == '{"nodes": [], "edges": []}'


def test_graph_answers():
    g = parse_response(T.GRAPH_FROM_SCENE, paper_text("graph_from_scene_directed.answer"))
    assert sorted(g.node_ids) == ["Alice", "Bob", "Claire", "Daniel", "Ed"]
    assert parse_response(T.GRAPH_FROM_SCENE, "graph { a -- }") == Malformed("bad-graph")
    assert parse_response(T.GRAPH_FROM_SCENE, "no graph") == Malformed("no-block")
    g = parse_response(T.GRAPH_GENERATION, paper_text("graph_generation_attrs.answer"))
    assert g.num_edges == 7
    conv = "```\nGraph G has 2 nodes, numbered from 0 to 1. Graph G has 1 edges.\nThis is the list of edge connections:\n[0, 1]\n```"
    assert parse_response(T.FORMAT_CONVERSION, conv).edge_pairs() == [(0, 1)]


def test_svg_summary_counts_shapes_and_skips_markers():
    svg = (
        '<svg xmlns="http://www.w3.org/2000/svg"><defs><marker><path d="M0 0"/></marker></defs>'
        '<line x1="0" y1="0" x2="100" y2="0"/><circle cx="0" cy="0" r="5"/><circle cx="50" cy="0" r="5"/>'
        '<circle cx="100" cy="0" r="5"/><text>A</text></svg>'
    )
    s = parse_svg_answer(f"```svg\n{svg}\n```")
    assert isinstance(s, SvgSummary)
    assert (s.node_count, s.edge_count, s.labels) == (3, 1, ("A",))
    assert len(s.warnings) == 1 and "passes through a node" in s.warnings[0]
    assert parse_svg_answer("<svg><circle></svg>") == Malformed("bad-svg")
    assert parse_svg_answer("no drawing") == Malformed("no-block")


def test_scene_text_reads_co_mentions():
    assert {e.pair for e in parse_scene_text("Alice met Bob. Claire stayed home.", ["Alice", "Bob", "Claire"]).edges} == {
        frozenset({"Alice", "Bob"})
    }
    # the published story links Daniel and Ed only through "they", and names
    # Bob and Claire in one sentence without them interacting
    g = parse_scene_text(paper_text("scene_from_graph.answer"), ["Alice", "Bob", "Claire", "Daniel", "Ed"])
    got, want = {e.pair for e in g.edges}, {frozenset(p) for p in pc.SCENE_EDGES}
    assert want - got == {frozenset({"Daniel", "Ed"})}
    assert got - want == {frozenset({"Bob", "Claire"})}
    assert parse_response(T.SCENE_FROM_GRAPH, "Alice met Bob.") == Malformed("missing-context")


@pytest.mark.parametrize("text", [None, 42, "", "   ", b"\xff", "x" * 200_001])
def test_parse_response_is_total(text):
    for task in T:
        assert parse_response(task, text) is not None
    assert isinstance(parse_response(T.EDGE_LENGTH, text), (int, Malformed))


def test_unknown_task():
    assert parse_response("poetry", "roses") == Malformed("unknown-task")


def test_expected_nodes_for():
    assert expected_nodes_for(T.LAYER_ASSIGNMENT, pc.LA) == list(range(10))
    assert expected_nodes_for(T.EDGE_LENGTH, pc.EL) is None
