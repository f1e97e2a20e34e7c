"""scikit-learn style wrapper around the layered layout pipeline.

``LayeredLayout`` follows the estimator conventions (constructor stores
hyperparameters verbatim, ``fit`` learns trailing-underscore attributes,
``get_params``/``set_params`` come from ``BaseEstimator``) so layouts can
be configured and cloned like any other transformer. The input is a graph
rather than a feature matrix, and ``transform`` returns one ``[x, y]``
row per node in node order.
"""

from __future__ import annotations

from typing import Any, Iterable

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .formats import graph_from_dict
from .graph import Graph, NodeId
from .layout import layout_pipeline, total_edge_length


def check_graph(X: Any, directed: bool = True) -> Graph:
    """Coerce ``X`` to a :class:`Graph`.

    Accepts a graph, a JSON-style graph dict, or an iterable of
    ``(source, target)`` pairs.
    """
    if isinstance(X, Graph):
        return X
    if isinstance(X, dict):
        return graph_from_dict(X)
    if isinstance(X, (str, bytes)):
        raise TypeError("pass a parsed graph, not raw text; see layerlab.formats.parse_graph")
    try:
        pairs = [tuple(p) for p in X]
    except TypeError as exc:
        raise TypeError(f"cannot read a graph from {type(X).__name__}") from exc
    if any(len(p) != 2 for p in pairs):
        raise ValueError("edge pairs must have exactly two endpoints")
    return Graph.from_edges(pairs, directed=directed)


def check_source(g: Graph, source: NodeId | None) -> NodeId:
    if not g.nodes:
        raise ValueError("cannot lay out an empty graph")
    if source is None:
        return g.node_ids[0]
    if source not in g:
        raise ValueError(f"source {source!r} is not a node of the graph")
    return source


class LayeredLayout(TransformerMixin, BaseEstimator):
    """Breadth-first layering, median ordering and grid coordinates.

    Parameters
    ----------
    source : node id or None
        Root of the layering; ``None`` picks the first node.
    passes : int
        Number of median sweeps.
    direction : {"down", "up", "alternate"}
    spacing : float
        Grid step between layers and between neighbors in a layer.
    orientation : {"horizontal", "vertical"}
    """

    def __init__(self, source=None, passes=1, direction="down", spacing=100.0, orientation="horizontal"):
        self.source = source
        self.passes = passes
        self.direction = direction
        self.spacing = spacing
        self.orientation = orientation

    def fit(self, X, y=None):
        g = check_graph(X)
        source = check_source(g, self.source)
        result = layout_pipeline(
            g, source, passes=self.passes, direction=self.direction, spacing=self.spacing,
            orientation=self.orientation,
        )
        self.graph_ = g
        self.source_ = source
        self.ranks_ = result.ranks
        self.ordering_ = result.ordering
        self.pruned_graph_ = result.pruned
        self.crossings_before_ = result.crossings_before
        self.crossings_ = result.crossings_after
        self.edge_length_ = total_edge_length(result.ranks, result.pruned)
        self.positions_ = result.positions
        self.n_nodes_in_ = g.num_nodes
        return self

    def transform(self, X=None) -> list[list[float]]:
        check_is_fitted(self, "positions_")
        g = self.graph_ if X is None else check_graph(X)
        if X is not None and set(g.node_ids) != set(self.graph_.node_ids):
            raise ValueError("transform expects the graph the layout was fitted on")
        return [list(self.positions_[n]) for n in g.node_ids]

    def layers(self) -> list[list[NodeId]]:
        check_is_fitted(self, "ordering_")
        return self.ordering_.to_lists()


def fit_many(graphs: Iterable[Any], **params: Any) -> list[LayeredLayout]:
    return [LayeredLayout(**params).fit(g) for g in graphs]
