import pytest

from layerlab.formats import graph_to_dict
from layerlab.graph import Graph
from layerlab.harness.prompts import (
    DEFAULT_CHAR_BUDGET,
    InsufficientPoolError,
    PromptBudgetError,
    PromptSpec,
    build_prompt,
    format_answer,
    render_prompt,
    sample_icl_examples,
)
from layerlab.harness.tasks import Strategy, TaskKind, make_instances
from layerlab.generate import random_connected_graph

from . import paper_cases as pc
from .conftest import normalize, paper_text

T = TaskKind


@pytest.mark.parametrize(
    "name, task, strategy, payload",
    [
        ("layer_assignment_standard", T.LAYER_ASSIGNMENT, "standard", pc.LA),
        ("layer_assignment_steps", T.LAYER_ASSIGNMENT, "steps", pc.LA),
        ("sort_layers_standard", T.SORT_LAYERS, "standard", pc.SORT),
        ("sort_layers_steps", T.SORT_LAYERS, "steps", pc.SORT),
        ("count_crossings_standard", T.COUNT_CROSSINGS, "standard", pc.CC),
        ("count_crossings_steps", T.COUNT_CROSSINGS, "steps", pc.CC),
        ("edge_length_standard", T.EDGE_LENGTH, "standard", pc.EL),
        ("edge_length_steps", T.EDGE_LENGTH, "steps", pc.EL),
        ("graph_generation_plain", T.GRAPH_GENERATION, "standard", {"n": 5, "m": 7}),
        (
            "graph_generation_attrs",
            T.GRAPH_GENERATION,
            "standard",
            {"n": 5, "m": 7, "timestamp_range": ["1970-01-01", "1970-12-31"], "weight_above": 2},
        ),
        (
            "bulbaceous_2",
            T.PROPERTY_CHECK,
            "standard",
            {"property": "bulbaceous", "graph": graph_to_dict(Graph.from_edges([(0, 1)] * 6, nodes=[0, 1]))},
        ),
        (
            "flamboyous_1",
            T.PROPERTY_CHECK,
            "standard",
            {
                "property": "flamboyous",
                "graph": graph_to_dict(Graph.from_edges([(0, 1), (0, 1), (0, 2), (1, 2), (1, 2)], nodes=[0, 1, 2])),
            },
        ),
        ("scene_from_graph", T.SCENE_FROM_GRAPH, "standard", {"graph": graph_to_dict(pc.SCENE_GRAPH)}),
    ],
)
def test_zero_shot_templates_reproduce_published_prompts(name, task, strategy, payload):
    text, answers = render_prompt(task, strategy, payload)
    assert normalize(text) == paper_text(f"{name}.query")
    assert answers == ()


@pytest.mark.parametrize(
    "name, task, payload, examples",
    [
        ("layer_assignment_icl", T.LAYER_ASSIGNMENT, pc.LA, pc.la_pool()),
        ("count_crossings_icl", T.COUNT_CROSSINGS, pc.CC, pc.pool(T.COUNT_CROSSINGS, pc.CC_POOL, "cc")),
        ("edge_length_icl", T.EDGE_LENGTH, pc.EL, pc.pool(T.EDGE_LENGTH, pc.EL_POOL, "el")),
    ],
)
def test_icl_prompts_with_oracle_answers(name, task, payload, examples):
    text, answers = render_prompt(task, "icl", payload, examples)
    assert normalize(text) == paper_text(f"{name}.query")
    assert len(answers) == len(examples)


def test_sort_icl_prompt_with_transcribed_answers():
    expected = paper_text("sort_layers_icl.query")
    answers = pc.fixture_answers(expected)
    examples = pc.pool(T.SORT_LAYERS, pc.SORT_POOL, "s")
    text, used = render_prompt(T.SORT_LAYERS, "icl", pc.SORT, examples, answers=answers)
    assert normalize(text) == expected
    assert list(used) == answers
    # those example answers do not all follow the median rule, so the oracle's differ
    oracle_text, _ = render_prompt(T.SORT_LAYERS, "icl", pc.SORT, examples)
    assert normalize(oracle_text) != expected


def test_answer_count_must_match_examples():
    with pytest.raises(ValueError):
        render_prompt(T.SORT_LAYERS, "icl", pc.SORT, pc.pool(T.SORT_LAYERS, pc.SORT_POOL, "s"), answers=["x"])


def test_utility_strategies_add_scaffolds():
    payload = {"property": "bulbaceous", "graph": graph_to_dict(Graph.from_edges([(0, 1)], nodes=[0, 1]))}
    std, _ = render_prompt(T.PROPERTY_CHECK, "standard", payload)
    steps, _ = render_prompt(T.PROPERTY_CHECK, "steps", payload)
    assert std.endswith("Write no explanations.")
    assert "step by step" in steps and "Write no explanations." not in steps


def test_answer_formats():
    assert format_answer(T.COUNT_CROSSINGS, "icl", pc.CC) == "1"
    assert format_answer(T.COUNT_CROSSINGS, "standard", {"a": [0], "b": [1], "edges": [[0, 1]]}) == "[]"
    assert format_answer(T.EDGE_LENGTH, "steps", pc.EL).endswith("Therefore, the final sum is 20.")
    assert format_answer(T.PROPERTY_CHECK, "standard", {"property": "bulbaceous", "graph": pc.LA["graph"]}) == "Yes."
    la = format_answer(T.LAYER_ASSIGNMENT, "standard", pc.LA)
    assert la.splitlines()[:3] == ["0 - 0", "5 - 1", "9 - 2"]


def test_unreachable_nodes_are_spelled_out():
    payload = {"graph": graph_to_dict(Graph.from_edges([(0, 1)], nodes=[0, 1, 2])), "source": 0}
    assert "2 - unreachable" in format_answer(T.LAYER_ASSIGNMENT, "standard", payload)


def _instances(task, count=6):
    out = []
    for i in range(count):
        out.extend(make_instances(task, f"g{i}", random_connected_graph(10, 13, seed=i)))
    return out


def test_icl_sampling_is_seeded_and_excludes_the_query():
    pool = _instances(T.COUNT_CROSSINGS)
    first = sample_icl_examples(pool, 4, pool[0].id, seed=1)
    assert first == sample_icl_examples(pool, 4, pool[0].id, seed=1)
    assert pool[0] not in first
    assert len({ex.id for ex in first}) == 4
    with pytest.raises(InsufficientPoolError):
        sample_icl_examples(pool[:3], 3, pool[0].id, seed=1)
    with pytest.raises(ValueError):
        sample_icl_examples([pool[1], pool[1]], 1, pool[0].id, seed=1)


def test_build_prompt_draws_k_in_range_and_round_trips():
    pool = _instances(T.EDGE_LENGTH)
    ks = set()
    for inst in pool:
        spec = build_prompt(T.EDGE_LENGTH, "icl", inst, pool, seed=3)
        assert 3 <= len(spec.icl_example_ids) <= 5
        assert inst.id not in spec.icl_example_ids
        ks.add(len(spec.icl_example_ids))
        assert PromptSpec.from_json(spec.to_json()) == spec
    fixed = build_prompt(T.EDGE_LENGTH, Strategy("icl", 5), pool[0], pool, seed=3)
    assert len(fixed.icl_example_ids) == 5
    assert fixed.id == f"edge_length:icl:{pool[0].id}:3"


def test_build_prompt_budget_and_task_mismatch():
    inst = _instances(T.LAYER_ASSIGNMENT, 1)[0]
    with pytest.raises(PromptBudgetError):
        build_prompt(T.LAYER_ASSIGNMENT, "standard", inst, char_budget=10)
    with pytest.raises(ValueError):
        build_prompt(T.EDGE_LENGTH, "standard", inst)


def test_default_budget_fits_every_task_on_small_graphs():
    for task in T:
        pool = _instances(task, 6)
        for inst in pool[:4]:
            for strategy in ("standard", "steps", Strategy("icl", 5)):
                spec = build_prompt(task, strategy, inst, pool, seed=0)
                assert len(spec.text) <= DEFAULT_CHAR_BUDGET
