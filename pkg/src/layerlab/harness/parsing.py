"""Extract task answers from free-form model responses.

Every entry point is total: arbitrary text yields either a task-typed value
or a :class:`Malformed` carrying a short reason code. When a response
restates intermediate results (step-by-step answers do), the last
well-formed block wins.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Any, Iterable

from ..formats import GraphFormatError, parse_dot, parse_edgelist, parse_json_graph
from ..graph import Graph, GraphError, NodeId
from .outcomes import Malformed
from .tasks import TaskKind

# reason codes
NO_ANSWER = "no-answer"
NO_BLOCK = "no-block"
NON_NUMERIC = "non-numeric"
DUPLICATE_NODE = "duplicate-node"
NON_PERMUTATION = "non-permutation"
BAD_GRAPH = "bad-graph"
BAD_SVG = "bad-svg"
MISSING_CONTEXT = "missing-context"
TRANSPORT = "transport"

_MAX_CHARS = 200_000


def _node_id(token: str) -> NodeId:
    token = token.strip().strip("'\"`")
    return int(token) if re.fullmatch(r"-?\d+", token) else token


# -- layer assignment -------------------------------------------------------------

_RANK_LINE = re.compile(
    r"^\s*(?:[-*]\s+)?(?:node\s+)?(?P<id>[A-Za-z_]\w*|\d+)\s*(?:-|:|->)\s*(?:rank\s+|layer\s+)?"
    r"(?P<rank>\d+|unreachable|none|inf)\s*[.,;]?\s*$",
    re.IGNORECASE,
)


def _rank_blocks(text: str) -> list[list[tuple[str, str]]]:
    blocks: list[list[tuple[str, str]]] = []
    current: list[tuple[str, str]] = []
    for line in text.splitlines():
        m = _RANK_LINE.match(line)
        if m:
            current.append((m.group("id"), m.group("rank")))
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    return blocks


def parse_rank_lines(text: str, expected_nodes: Iterable[NodeId] | None = None) -> dict[NodeId, int | None] | Malformed:
    blocks = _rank_blocks(text)
    if not blocks:
        return Malformed(NO_BLOCK)
    chosen = blocks[-1]
    if expected_nodes is not None:
        want = set(expected_nodes)
        complete = [b for b in blocks if {_node_id(i) for i, _ in b} >= want]
        if complete:
            chosen = complete[-1]
    out: dict[NodeId, int | None] = {}
    for raw_id, raw_rank in chosen:
        node = _node_id(raw_id)
        if node in out:
            return Malformed(DUPLICATE_NODE)
        out[node] = int(raw_rank) if raw_rank.isdigit() else None
    return out


# -- sorted layers ----------------------------------------------------------------

_LAYER_LINE = re.compile(r"Layer\s+(?P<i>\d+)\s*:\s*\[(?P<items>[^\[\]\n]*)\]", re.IGNORECASE)


def parse_layer_lines(text: str) -> list[list[NodeId]] | Malformed:
    runs: list[list[str]] = []
    current: list[str] | None = None
    for m in _LAYER_LINE.finditer(text):
        i = int(m.group("i"))
        if i == 0:
            current = [m.group("items")]
            runs.append(current)
        elif current is not None and i == len(current):
            current.append(m.group("items"))
        else:
            current = None
    if not runs:
        return Malformed(NO_BLOCK)
    layers = []
    seen = set()
    for items in runs[-1]:
        tokens = [t for t in (s.strip() for s in items.split(",")) if t]
        layer = []
        for tok in tokens:
            if not re.fullmatch(r"['\"`]?\w+['\"`]?", tok):
                return Malformed(NON_PERMUTATION)
            node = _node_id(tok)
            if node in seen:
                return Malformed(DUPLICATE_NODE)
            seen.add(node)
            layer.append(node)
        layers.append(layer)
    return layers


# -- integers ---------------------------------------------------------------------

_NUMBER = re.compile(r"(?<![\w.])-?\d+(?:\.\d+)?(?![\w]|\.\d)")


def final_integer(text: str) -> int | Malformed:
    found = _NUMBER.findall(text)
    if not found:
        return Malformed(NO_ANSWER)
    last = found[-1]
    if "." in last:
        whole, frac = last.split(".")
        if set(frac) != {"0"}:
            return Malformed(NON_NUMERIC)
        last = whole
    return int(last)


_PAIR = r"\(\s*[\w'\"]+\s*,\s*[\w'\"]+\s*\)"
_PAIR_LINE = re.compile(
    rf"^\s*(?:[-*]\s+|\d+[.)]\s+)?\[?\s*{_PAIR}\s*(?:and|,|&|x|-|–)?\s*{_PAIR}\s*\]?\s*[.,;]?\s*$",
    re.IGNORECASE,
)
_EMPTY_ANSWER = re.compile(
    r"^\s*(?:\[\s*\]|\(\s*\)|none\.?|an? empty list\.?|empty list\.?|"
    r"there (?:are|is) no (?:edge )?crossings?\.?|no (?:edge )?crossings?\.?)\s*$",
    re.IGNORECASE,
)


def parse_crossing_answer(text: str) -> int | Malformed:
    """Count crossing pairs listed one per line, or read a bare count."""
    body = "\n".join(line for line in text.splitlines() if line.strip() and not line.strip().startswith("```"))
    if _EMPTY_ANSWER.match(body):
        return 0
    lines = body.splitlines()
    if lines and all(_PAIR_LINE.match(line) for line in lines):
        return len(lines)
    return final_integer(text)


# -- yes / no ---------------------------------------------------------------------

_YES_NO = re.compile(r"\b(yes|no)\b", re.IGNORECASE)


def parse_yes_no(text: str) -> bool | Malformed:
    found = _YES_NO.findall(text)
    if not found:
        return Malformed(NO_ANSWER)
    return found[-1].lower() == "yes"


# -- blocks -----------------------------------------------------------------------

_FENCE = re.compile(r"```[ \t]*(?P<lang>[\w+-]*)[^\n]*\n(?P<body>.*?)```", re.DOTALL)


def fenced_blocks(text: str) -> list[tuple[str, str]]:
    return [(m.group("lang").lower(), m.group("body")) for m in _FENCE.finditer(text)]


def _balanced(text: str, start: int, open_ch: str, close_ch: str) -> str | None:
    depth = 0
    in_str = False
    i = start
    while i < len(text):
        ch = text[i]
        if in_str:
            if ch == "\\":
                i += 1
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == open_ch:
            depth += 1
        elif ch == close_ch:
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
        i += 1
    return None


def _last_fenced(text: str, langs: tuple[str, ...]) -> str | None:
    blocks = fenced_blocks(text)
    tagged = [body for lang, body in blocks if lang in langs]
    if tagged:
        return tagged[-1]
    untagged = [body for lang, body in blocks if lang == ""]
    return untagged[-1] if untagged else None


_DOT_HEAD = re.compile(r"(?:strict\s+)?(?:di)?graph\b[^{}\n]*\{", re.IGNORECASE)


def extract_dot(text: str) -> str | None:
    candidates = [text]
    fenced = _last_fenced(text, ("dot", "graphviz", "gv"))
    if fenced is not None:
        candidates.insert(0, fenced)
    for chunk in candidates:
        heads = list(_DOT_HEAD.finditer(chunk))
        for m in reversed(heads):
            body = _balanced(chunk, m.end() - 1, "{", "}")
            if body is not None:
                return chunk[m.start() : m.end() - 1] + body
    return None


def extract_json(text: str) -> str | None:
    fenced = _last_fenced(text, ("json",))
    if fenced is not None and fenced.strip().startswith("{"):
        return fenced
    for i in reversed([m.start() for m in re.finditer(r"\{", text)]):
        body = _balanced(text, i, "{", "}")
        if body is not None and '"nodes"' in body:
            return body
    return None


def extract_svg(text: str) -> str | None:
    matches = list(re.finditer(r"<svg\b.*?</svg\s*>", text, re.DOTALL | re.IGNORECASE))
    return matches[-1].group(0) if matches else None


def parse_dot_answer(text: str) -> Graph | Malformed:
    dot = extract_dot(text)
    if dot is None:
        return Malformed(NO_BLOCK)
    try:
        return parse_dot(dot)
    except (GraphFormatError, GraphError, ValueError):
        return Malformed(BAD_GRAPH)


def parse_json_answer(text: str) -> Graph | Malformed:
    body = extract_json(text)
    if body is None:
        return Malformed(NO_BLOCK)
    try:
        return parse_json_graph(body)
    except (GraphFormatError, GraphError, ValueError, TypeError, KeyError):
        return Malformed(BAD_GRAPH)


def parse_edgelist_answer(text: str) -> Graph | Malformed:
    fenced = _last_fenced(text, ("text", "txt", "plaintext"))
    candidates = ([fenced] if fenced is not None else []) + [text]
    for chunk in candidates:
        at = chunk.find("Graph G has")
        if at < 0:
            continue
        try:
            return parse_edgelist(chunk[at:].strip())
        except (GraphFormatError, GraphError, ValueError):
            return Malformed(BAD_GRAPH)
    return Malformed(NO_BLOCK)


# -- svg --------------------------------------------------------------------------


@dataclass(frozen=True)
class SvgSummary:
    """Structural reading of an SVG drawing."""

    node_count: int
    edge_count: int
    labels: tuple[str, ...]
    warnings: tuple[str, ...] = ()


_NODE_TAGS = {"circle", "ellipse", "rect"}
_EDGE_TAGS = {"line", "path", "polyline"}
_SKIP = {"defs", "marker", "style", "title", "desc"}


def _float(el: ET.Element, name: str) -> float | None:
    raw = el.get(name)
    if raw is None:
        return None
    try:
        return float(re.sub(r"[a-z%]+$", "", raw.strip()))
    except ValueError:
        return None


def parse_svg_answer(text: str) -> SvgSummary | Malformed:
    svg = extract_svg(text)
    if svg is None:
        return Malformed(NO_BLOCK)
    try:
        root = ET.fromstring(svg)
    except ET.ParseError:
        return Malformed(BAD_SVG)
    nodes, edges, labels = [], [], []

    def walk(el: ET.Element) -> None:
        tag = el.tag.rsplit("}", 1)[-1].lower()
        if tag in _SKIP:
            return
        if tag in _NODE_TAGS:
            nodes.append(el)
        elif tag in _EDGE_TAGS:
            edges.append(el)
        elif tag == "text":
            labels.append("".join(el.itertext()).strip())
        for child in el:
            walk(child)

    walk(root)
    centers = []
    for el in nodes:
        cx, cy = _float(el, "cx"), _float(el, "cy")
        if cx is not None and cy is not None:
            centers.append((cx, cy))
    warnings = []
    for el in edges:
        coords = [_float(el, k) for k in ("x1", "y1", "x2", "y2")]
        if None in coords:
            continue
        x1, y1, x2, y2 = coords
        seg2 = (x2 - x1) ** 2 + (y2 - y1) ** 2
        if seg2 == 0:
            continue
        for cx, cy in centers:
            t = ((cx - x1) * (x2 - x1) + (cy - y1) * (y2 - y1)) / seg2
            if not 0.05 < t < 0.95:
                continue
            # distance from the center to the segment, squared
            px, py = x1 + t * (x2 - x1), y1 + t * (y2 - y1)
            if (px - cx) ** 2 + (py - cy) ** 2 < 1.0:
                warnings.append(f"line ({x1:g},{y1:g})-({x2:g},{y2:g}) passes through a node at ({cx:g},{cy:g})")
    return SvgSummary(len(nodes), len(edges), tuple(labels), tuple(warnings))


# -- scene text -------------------------------------------------------------------


def parse_scene_text(text: str, names: Iterable[str]) -> Graph:
    """Interaction graph read off a story: names co-mentioned in a sentence interact."""
    names = list(dict.fromkeys(names))
    pattern = {n: re.compile(rf"\b{re.escape(n)}\b") for n in names}
    edges: list[tuple[str, str]] = []
    seen = set()
    for sentence in re.split(r"(?<=[.!?])\s+|\n+", text):
        present = [n for n in names if pattern[n].search(sentence)]
        for i, a in enumerate(present):
            for b in present[i + 1 :]:
                key = frozenset((a, b))
                if key not in seen:
                    seen.add(key)
                    edges.append((a, b))
    return Graph.from_edges(edges, nodes=names, directed=False)


# -- dispatch ---------------------------------------------------------------------


def parse_response(task: TaskKind | str, text: Any, expected_nodes: Iterable[NodeId] | None = None) -> Any:
    """Task-typed value extracted from ``text``, or :class:`Malformed`.

    ``expected_nodes`` lets layer-assignment parsing prefer the last block
    that covers every node, and supplies the cast of names when reading a
    scene back into a graph.
    """
    try:
        task = TaskKind(task)
    except ValueError:
        return Malformed("unknown-task")
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    if not isinstance(text, str):
        return Malformed(NO_ANSWER)
    if not text.strip():
        return Malformed(NO_ANSWER)
    if len(text) > _MAX_CHARS:
        return Malformed("too-long")
    try:
        return _dispatch(task, text, expected_nodes)
    except (ValueError, TypeError, KeyError, RecursionError, GraphError) as exc:  # totality backstop
        return Malformed(f"unparseable:{type(exc).__name__}")


def _dispatch(task: TaskKind, text: str, expected_nodes) -> Any:
    if task is TaskKind.LAYER_ASSIGNMENT:
        return parse_rank_lines(text, expected_nodes)
    if task is TaskKind.SORT_LAYERS:
        return parse_layer_lines(text)
    if task is TaskKind.COUNT_CROSSINGS:
        return parse_crossing_answer(text)
    if task is TaskKind.EDGE_LENGTH:
        return final_integer(text)
    if task is TaskKind.PROPERTY_CHECK:
        return parse_yes_no(text)
    if task is TaskKind.GRAPH_GENERATION:
        return parse_json_answer(text)
    if task is TaskKind.FORMAT_CONVERSION:
        return parse_edgelist_answer(text)
    if task is TaskKind.GRAPH_FROM_SCENE:
        return parse_dot_answer(text)
    if task is TaskKind.SVG_FROM_DOT:
        return parse_svg_answer(text)
    if expected_nodes is None:
        return Malformed(MISSING_CONTEXT)
    return parse_scene_text(text, [str(n) for n in expected_nodes])


def expected_nodes_for(task: TaskKind, payload: dict) -> list[NodeId] | None:
    """The node ids a parser may need for ``task``, read from the instance payload."""
    task = TaskKind(task)
    if task in (TaskKind.LAYER_ASSIGNMENT, TaskKind.SCENE_FROM_GRAPH) and "graph" in payload:
        return [n["id"] for n in payload["graph"]["nodes"]]
    return None
