import datetime as dt

import pytest

from layerlab.generate import AttributeSpec, InfeasibleGraphError, generate_random_graph, random_connected_graph
from layerlab.layout import assign_layers_bfs


def test_counts_and_simplicity():
    g = generate_random_graph(6, 9, seed=3)
    assert g.num_nodes == 6 and g.num_edges == 9
    pairs = [e.pair for e in g.edges]
    assert len(set(pairs)) == 9
    assert not any(e.is_loop for e in g.edges)


def test_seed_determinism():
    assert generate_random_graph(8, 10, seed=1) == generate_random_graph(8, 10, seed=1)
    assert generate_random_graph(8, 10, seed=1) != generate_random_graph(8, 10, seed=2)


def test_attributes_respect_bounds():
    spec = AttributeSpec((dt.date(1970, 1, 1), dt.date(1970, 12, 31)), weight_above=2, labels=True)
    g = generate_random_graph(5, 7, spec, seed=0, first_id=1)
    assert g.node_ids == [1, 2, 3, 4, 5]
    assert all(dt.date(1970, 1, 1) <= n.timestamp <= dt.date(1970, 12, 31) for n in g.nodes)
    assert all(2 < e.weight <= 12 for e in g.edges)
    assert g.node(1).label == "Node 1"


def test_multigraph_mode_allows_more_edges():
    g = generate_random_graph(2, 5, simple=False)
    assert g.num_edges == 5


@pytest.mark.parametrize("n, m, simple", [(0, 0, True), (3, -1, True), (3, 4, True), (1, 1, False)])
def test_infeasible_requests(n, m, simple):
    with pytest.raises(InfeasibleGraphError):
        generate_random_graph(n, m, simple=simple)


def test_empty_date_range():
    with pytest.raises(ValueError):
        AttributeSpec((dt.date(1971, 1, 1), dt.date(1970, 1, 1)))


def test_connected_graphs_are_connected():
    for seed in range(10):
        g = random_connected_graph(10, 14, seed=seed)
        assert g.num_edges == 14
        assert not assign_layers_bfs(g, 0).unreachable
    with pytest.raises(InfeasibleGraphError):
        random_connected_graph(5, 3)
