"""Invariants checked on generated inputs."""

from hypothesis import given, settings, strategies as st

from layerlab.formats import GraphFormat, emit_graph, parse_graph
from layerlab.graph import Graph, same_topology
from layerlab.harness.outcomes import Malformed
from layerlab.harness.parsing import parse_response
from layerlab.harness.tasks import TaskKind
from layerlab.layout import (
    LayeredOrdering,
    assign_layers_bfs,
    count_crossings_bipartite,
    median_sweep,
    remove_same_layer_edges,
    total_edge_length,
)

from .oracles import brute_force_crossings, distances, naive_sweep


@st.composite
def bipartite(draw):
    na = draw(st.integers(1, 8))
    nb = draw(st.integers(1, 8))
    a = draw(st.permutations(list(range(na))))
    b = draw(st.permutations(list(range(100, 100 + nb))))
    pairs = st.tuples(st.sampled_from(a), st.sampled_from(b))
    edges = draw(st.lists(pairs, max_size=15, unique=True))
    return a, b, edges


@st.composite
def graphs(draw, max_nodes=9):
    n = draw(st.integers(1, max_nodes))
    edges = draw(
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1]), max_size=20)
    )
    return Graph.from_edges(edges, nodes=range(n))


@st.composite
def layered(draw):
    sizes = draw(st.lists(st.integers(1, 5), min_size=2, max_size=5))
    layers, nxt = [], 0
    for s in sizes:
        layers.append(list(range(nxt, nxt + s)))
        nxt += s
    edges = []
    for i in range(len(layers) - 1):
        pairs = st.tuples(st.sampled_from(layers[i]), st.sampled_from(layers[i + 1]))
        edges += draw(st.lists(pairs, max_size=8, unique=True))
    return layers, edges


@given(bipartite())
def test_crossings_match_pair_enumeration(inst):
    a, b, edges = inst
    assert count_crossings_bipartite(a, b, edges).total == brute_force_crossings(a, b, edges)


@given(bipartite())
def test_crossings_symmetric_under_side_swap_and_reversal(inst):
    a, b, edges = inst
    total = count_crossings_bipartite(a, b, edges).total
    assert count_crossings_bipartite(b, a, [(t, s) for s, t in edges]).total == total
    assert count_crossings_bipartite(a[::-1], b[::-1], edges).total == total


@given(graphs())
def test_bfs_ranks_are_distances(g):
    r = assign_layers_bfs(g, 0)
    expected = distances(g.node_ids, g.edge_pairs(), 0)
    assert r.ranks == {n: d for n, d in expected.items() if d is not None}
    assert r.unreachable == {n for n, d in expected.items() if d is None}


@given(graphs())
def test_bfs_pruning_leaves_unit_edges(g):
    r = assign_layers_bfs(g, 0)
    reach = set(r.ranks)
    sub = Graph.from_edges([p for p in g.edge_pairs() if p[0] in reach and p[1] in reach], nodes=sorted(reach))
    pruned = remove_same_layer_edges(sub, r)
    assert total_edge_length(r, pruned) == pruned.num_edges


@given(layered())
def test_sweep_matches_naive_and_permutes_layers(inst):
    layers, edges = inst
    g = Graph.from_edges(edges, nodes=[n for layer in layers for n in layer])
    swept = median_sweep(LayeredOrdering(layers), g).to_lists()
    assert swept == naive_sweep(layers, edges)
    assert [sorted(x) for x in swept] == [sorted(x) for x in layers]
    assert swept[-1] == layers[-1]


@settings(max_examples=60)
@given(graphs(), st.sampled_from(list(GraphFormat)))
def test_format_round_trip(g, fmt):
    assert same_topology(parse_graph(emit_graph(g, fmt), fmt), g)


@given(st.sampled_from(list(TaskKind)), st.text(max_size=300))
def test_parser_is_total(task, text):
    out = parse_response(task, text)
    if isinstance(out, Malformed):
        assert out.reason
