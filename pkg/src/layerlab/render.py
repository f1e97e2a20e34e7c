"""Deterministic SVG output for layered drawings and outcome histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

from .graph import Graph, NodeId
from .layout import GridPositions


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class SvgStyle:
    node_radius: float = 14.0
    margin: float = 40.0
    font_size: float = 12.0
    node_fill: str = "#ffffff"
    stroke: str = "#333333"
    orientation: str = "horizontal"  # "vertical" swaps axes so layers run top to bottom


@dataclass(frozen=True)
class SvgDocument:
    width: float
    height: float
    text: str
    warnings: tuple[str, ...] = field(default=())

    def __str__(self) -> str:
        return self.text


def stroke_width(weight: float | None) -> float:
    """Affine weight-to-width map, clamped to a legible range."""
    if weight is None:
        return 1.5
    return min(max(1.0 + weight, 0.5), 8.0)


def _num(x: float) -> str:
    text = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def edges_through_nodes(g: Graph, pos: GridPositions, tol: float = 1e-6) -> list[tuple[NodeId, NodeId, NodeId]]:
    """Edges whose straight segment passes over a third node's center.

    Such a drawing makes one edge read as two (``a-b`` looks like ``a-c``
    plus ``c-b``).
    """
    hits = []
    for e in g.edges:
        (x1, y1), (x2, y2) = pos[e.source], pos[e.target]
        seg = math.hypot(x2 - x1, y2 - y1)
        if seg == 0:
            continue
        for n in g.node_ids:
            if n in (e.source, e.target):
                continue
            x, y = pos[n]
            cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
            if abs(cross) / seg > tol:
                continue
            t = ((x - x1) * (x2 - x1) + (y - y1) * (y2 - y1)) / (seg * seg)
            if 0 < t < 1:
                hits.append((e.source, e.target, n))
    return hits


def render_layout_svg(g: Graph, pos: GridPositions, style: SvgStyle | None = None) -> SvgDocument:
    style = style or SvgStyle()
    for n in g.node_ids:
        if n not in pos:
            raise RenderError(f"no position for node {n!r}")
    coords = {}
    for n in g.node_ids:
        x, y = pos[n]
        coords[n] = (y, x) if style.orientation == "vertical" else (x, y)
    xs = [c[0] for c in coords.values()] or [0.0]
    ys = [c[1] for c in coords.values()] or [0.0]
    off_x = style.margin - min(xs)
    off_y = style.margin - min(ys)
    width = max(xs) - min(xs) + 2 * style.margin
    height = max(ys) - min(ys) + 2 * style.margin
    r = style.node_radius

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">'
    ]
    if g.directed:
        out.append(
            '<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="6" markerHeight="6" '
            f'orient="auto"><path d="M 0 0 L 10 5 L 0 10 z" fill="{style.stroke}"/></marker></defs>'
        )
    out.append('<g class="edges">')
    for e in g.edges:
        x1, y1 = coords[e.source]
        x2, y2 = coords[e.target]
        dx, dy = x2 - x1, y2 - y1
        d = math.hypot(dx, dy)
        if d > 2 * r:
            # trim to the circle rims so arrowheads stay visible
            ux, uy = dx / d, dy / d
            x1, y1, x2, y2 = x1 + ux * r, y1 + uy * r, x2 - ux * r, y2 - uy * r
        marker = ' marker-end="url(#arrow)"' if g.directed else ""
        out.append(
            f'<line x1="{_num(x1 + off_x)}" y1="{_num(y1 + off_y)}" x2="{_num(x2 + off_x)}" y2="{_num(y2 + off_y)}" '
            f'stroke="{style.stroke}" stroke-width="{_num(stroke_width(e.weight))}"{marker}/>'
        )
    out.append("</g>")
    out.append('<g class="nodes">')
    for node in g.nodes:
        x, y = coords[node.id]
        label = node.label if node.label is not None else str(node.id)
        out.append(
            f'<circle cx="{_num(x + off_x)}" cy="{_num(y + off_y)}" r="{_num(r)}" fill="{style.node_fill}" '
            f'stroke="{style.stroke}" data-node={quoteattr(str(node.id))}/>'
        )
        out.append(
            f'<text x="{_num(x + off_x)}" y="{_num(y + off_y + style.font_size / 3)}" font-size="{_num(style.font_size)}" '
            f'text-anchor="middle" font-family="sans-serif">{escape(label)}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    warnings = tuple(
        f"edge ({a}, {b}) passes through node {c}" for a, b, c in edges_through_nodes(g, pos)
    )
    return SvgDocument(width, height, "\n".join(out) + "\n", warnings)


def render_histogram_svg(
    buckets: Sequence[tuple[str, int]],
    title: str,
    bar_width: float = 60.0,
    plot_height: float = 200.0,
) -> SvgDocument:
    """Bar chart, one bar per bucket in input order, heights proportional to counts."""
    if not buckets:
        raise RenderError("histogram needs at least one bucket")
    if any(c < 0 for _, c in buckets):
        raise RenderError("bucket counts must be non-negative")
    peak = max(c for _, c in buckets)
    if peak == 0:
        raise RenderError("all buckets are empty")
    gap = bar_width / 3
    left, top, bottom = 50.0, 40.0, 60.0
    width = left + len(buckets) * (bar_width + gap) + gap
    height = top + plot_height + bottom
    base = top + plot_height

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
        f'<text x="{_num(width / 2)}" y="20" font-size="14" text-anchor="middle" font-family="sans-serif" '
        f'class="title">{escape(title)}</text>',
        f'<line x1="{_num(left)}" y1="{_num(top)}" x2="{_num(left)}" y2="{_num(base)}" stroke="#000" class="axis"/>',
        f'<line x1="{_num(left)}" y1="{_num(base)}" x2="{_num(width)}" y2="{_num(base)}" stroke="#000" class="axis"/>',
        f'<text x="12" y="{_num(top + plot_height / 2)}" font-size="11" text-anchor="middle" font-family="sans-serif" '
        f'transform="rotate(-90 12 {_num(top + plot_height / 2)})" class="axis-label">count</text>',
        f'<text x="{_num(left - 4)}" y="{_num(top + 4)}" font-size="10" text-anchor="end" font-family="sans-serif" '
        f'class="tick">{peak}</text>',
        '<g class="bars">',
    ]
    for i, (label, count) in enumerate(buckets):
        x = left + gap + i * (bar_width + gap)
        h = plot_height * count / peak
        out.append(
            f'<path d="M {_num(x)} {_num(base)} h {_num(bar_width)} v {_num(-h)} h {_num(-bar_width)} z" '
            f'fill="#4c78a8" class="bar" data-count="{count}"/>'
        )
        out.append(
            f'<text x="{_num(x + bar_width / 2)}" y="{_num(base + 16)}" font-size="10" text-anchor="middle" '
            f'font-family="sans-serif" class="axis-label">{escape(label)}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return SvgDocument(width, height, "\n".join(out) + "\n")
