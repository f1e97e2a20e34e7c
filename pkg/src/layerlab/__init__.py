"""Layered graph drawing oracle and LLM prompt-evaluation harness."""

from .estimator import LayeredLayout, check_graph
from .formats import GraphFormat, GraphFormatError, LossyEmissionError, emit_graph, parse_graph
from .generate import AttributeSpec, InfeasibleGraphError, generate_random_graph, random_connected_graph
from .graph import Edge, Graph, GraphError, Node, is_bulbaceous, is_flamboyous, same_topology
from .layout import (
    LayeredOrdering,
    LayoutError,
    LongEdgeError,
    RankAssignment,
    assign_coordinates,
    assign_layers_bfs,
    count_crossings_bipartite,
    count_crossings_total,
    is_valid_layering,
    layout_pipeline,
    median_sweep,
    random_layering,
    remove_same_layer_edges,
    total_edge_length,
)
from .render import render_histogram_svg, render_layout_svg

__version__ = "0.1.0"

__all__ = [
    "AttributeSpec",
    "Edge",
    "Graph",
    "GraphError",
    "GraphFormat",
    "GraphFormatError",
    "InfeasibleGraphError",
    "LayeredLayout",
    "LayeredOrdering",
    "LayoutError",
    "LongEdgeError",
    "LossyEmissionError",
    "Node",
    "RankAssignment",
    "assign_coordinates",
    "assign_layers_bfs",
    "check_graph",
    "count_crossings_bipartite",
    "count_crossings_total",
    "emit_graph",
    "generate_random_graph",
    "is_bulbaceous",
    "is_flamboyous",
    "is_valid_layering",
    "layout_pipeline",
    "median_sweep",
    "parse_graph",
    "random_connected_graph",
    "random_layering",
    "remove_same_layer_edges",
    "render_histogram_svg",
    "render_layout_svg",
    "same_topology",
    "total_edge_length",
]
