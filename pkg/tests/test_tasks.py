import random

import pytest

from layerlab.generate import random_connected_graph
from layerlab.graph import Graph
from layerlab.harness.tasks import (
    Strategy,
    TaskKind as T,
    ground_truth,
    make_instances,
    name_graph,
    oracle_value,
    perturb_value,
    write_scene,
)
from layerlab.layout import LayeredOrdering, total_edge_length

G = random_connected_graph(10, 14, seed=11)


def test_strategy_parsing():
    assert Strategy.parse("ICL(4)") == Strategy("icl", 4)
    assert str(Strategy("icl", 3)) == "icl(3)"
    assert Strategy.parse("steps", k=4) == Strategy("steps")
    for bad in (("guess", None), ("standard", 3), ("icl", 6)):
        with pytest.raises(ValueError):
            Strategy(*bad)


def test_instance_shapes():
    gaps = make_instances(T.COUNT_CROSSINGS, "g", G)
    lengths = {len(inst.payload["a"]) for inst in gaps}
    assert len(gaps) == len(make_instances(T.SORT_LAYERS, "g", G)[0].payload["layers"]) - 1
    assert lengths
    assert [i.id for i in make_instances(T.PROPERTY_CHECK, "g", G)] == ["g/bulbaceous", "g/flamboyous"]
    assert len(make_instances(T.GRAPH_GENERATION, "g", G)) == 2
    el = make_instances(T.EDGE_LENGTH, "g", G)[0]
    assert el.id == "g/random" and len(el.payload["layers"]) == 6 and el.payload["layers"][0] == [0]
    bfs = make_instances(T.EDGE_LENGTH, "g", G, layering="bfs")[0]
    assert oracle_value(T.EDGE_LENGTH, bfs.payload) == len(bfs.payload["edges"])


def test_disconnected_graphs_yield_no_layered_instances():
    g = Graph.from_edges([(0, 1)], nodes=[0, 1, 2])
    assert make_instances(T.SORT_LAYERS, "d", g) == []
    assert make_instances(T.COUNT_CROSSINGS, "d", g) == []
    assert len(make_instances(T.LAYER_ASSIGNMENT, "d", g)) == 1


def test_sort_truth_records_input_crossings_and_oracle():
    inst = make_instances(T.SORT_LAYERS, "g", G)[0]
    truth = ground_truth(T.SORT_LAYERS, inst.payload)
    assert truth["layers"] == inst.payload["layers"]
    assert sorted(map(sorted, truth["oracle"])) == sorted(map(sorted, truth["layers"]))


def test_naming_and_scenes():
    named = name_graph(G)
    assert named.node_ids[:3] == ["Alice", "Bob", "Claire"]
    assert not named.directed
    scene = write_scene(named, seed=1)
    assert scene.count(".") >= len({e.pair for e in named.edges})
    big = name_graph(Graph.from_edges([], nodes=range(20)))
    assert big.node_ids[16] == "Alice2"
    assert "alone" in write_scene(Graph.from_edges([("A", "B")], nodes=["A", "B", "C"]))


def test_perturbations_change_exactly_one_thing():
    rng = random.Random(0)
    assert perturb_value(T.EDGE_LENGTH, 0, rng) == 1
    assert abs(perturb_value(T.COUNT_CROSSINGS, 5, rng) - 5) == 1
    assert perturb_value(T.PROPERTY_CHECK, True, rng) is False
    layers = [[0], [1, 2, 3]]
    swapped = perturb_value(T.SORT_LAYERS, layers, rng)
    assert sum(a != b for a, b in zip(swapped[1], layers[1])) == 2
    assert perturb_value(T.SORT_LAYERS, [[0], [1]], rng) == [[0], [1]]
    ranks = {0: 0, 1: 1, 2: 2}
    moved = perturb_value(T.LAYER_ASSIGNMENT, ranks, rng)
    assert sum(moved[n] != ranks[n] for n in ranks) == 1
    assert perturb_value(T.FORMAT_CONVERSION, G, rng).num_edges == G.num_edges - 1


def test_random_layering_truth_matches_direct_sum():
    inst = make_instances(T.EDGE_LENGTH, "g", G, num_layers=4)[0]
    lo = LayeredOrdering(inst.payload["layers"])
    assert oracle_value(T.EDGE_LENGTH, inst.payload) == total_edge_length(lo.layer_of(), G)
