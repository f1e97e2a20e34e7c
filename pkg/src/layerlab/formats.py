"""Parsers and emitters for the four graph text formats.

``EdgeListText`` is the compact prompt preamble fed to the language model,
``JsonGraph`` the generator's output shape, ``GraphMLSubset`` the benchmark
corpus format (topology only) and ``DotSubset`` the scene-graph exchange
format (``graph``/``digraph``, node and edge statements, ``penwidth``).
"""

from __future__ import annotations

import datetime as dt
import json
import re
import xml.etree.ElementTree as ET
from enum import Enum

from .graph import Edge, Graph, GraphError, Node, NodeId


class GraphFormat(str, Enum):
    GRAPHML = "graphml"
    EDGELIST = "edgelist"
    JSON = "json"
    DOT = "dot"

    @classmethod
    def from_path(cls, path: str) -> GraphFormat:
        suffix = path.rsplit(".", 1)[-1].lower() if "." in path else ""
        try:
            return _SUFFIXES[suffix]
        except KeyError:
            raise ValueError(f"cannot infer graph format from {path!r}; pass an explicit format") from None


_SUFFIXES = {
    "graphml": GraphFormat.GRAPHML,
    "xml": GraphFormat.GRAPHML,
    "txt": GraphFormat.EDGELIST,
    "edgelist": GraphFormat.EDGELIST,
    "json": GraphFormat.JSON,
    "dot": GraphFormat.DOT,
    "gv": GraphFormat.DOT,
}


class GraphFormatError(ValueError):
    """Syntax or structure error while reading a graph.

    ``position`` is a character offset into the input (or ``None`` when the
    error is not tied to a location) and ``expected`` names the token the
    parser was looking for.
    """

    def __init__(self, message: str, position: int | None = None, expected: str | None = None):
        self.position = position
        self.expected = expected
        detail = message
        if position is not None:
            detail += f" at offset {position}"
        if expected is not None:
            detail += f" (expected {expected})"
        super().__init__(detail)


class LossyEmissionError(ValueError):
    """The target format cannot carry an attribute present in the graph."""


def parse_graph(text: str | bytes, fmt: GraphFormat | str) -> Graph:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise GraphFormatError("input is not valid UTF-8", exc.start) from None
    fmt = GraphFormat(fmt)
    parser = {
        GraphFormat.EDGELIST: parse_edgelist,
        GraphFormat.JSON: parse_json_graph,
        GraphFormat.GRAPHML: parse_graphml,
        GraphFormat.DOT: parse_dot,
    }[fmt]
    try:
        return parser(text)
    except GraphError as exc:
        raise GraphFormatError(str(exc)) from None


def emit_graph(g: Graph, fmt: GraphFormat | str, allow_lossy: bool = False) -> str:
    fmt = GraphFormat(fmt)
    emitter = {
        GraphFormat.EDGELIST: emit_edgelist,
        GraphFormat.JSON: emit_json_graph,
        GraphFormat.GRAPHML: emit_graphml,
        GraphFormat.DOT: emit_dot,
    }[fmt]
    return emitter(g, allow_lossy=allow_lossy)


def _check_lossy(g: Graph, fmt: str, *, weights: bool, labels: bool, timestamps: bool, allow_lossy: bool) -> None:
    if allow_lossy:
        return
    lost = []
    if not weights and g.is_weighted:
        lost.append("edge weights")
    if not labels and any(n.label is not None for n in g.nodes):
        lost.append("node labels")
    if not timestamps and any(n.timestamp is not None for n in g.nodes):
        lost.append("node timestamps")
    if lost:
        raise LossyEmissionError(f"{fmt} cannot carry {', '.join(lost)}; pass allow_lossy=True to drop them")


# -- edge-list text ---------------------------------------------------------

EDGELIST_PREAMBLE = (
    "Graph G has {n} nodes, numbered from {lo} to {hi}. Graph G has {m} edges.\n"
    "This is the list of edge connections:\n"
)

_PREAMBLE_RE = re.compile(
    r"\s*Graph G has (?P<n>\d+) nodes, numbered from (?P<lo>\d+) to (?P<hi>\d+)\.\s*"
    r"Graph G has (?P<m>\d+) edges\.\s*"
    r"This is the list of edge connections:"
)
_PAIR_RE = re.compile(r"\[\s*(\d+)\s*,\s*(\d+)\s*\]")


def emit_edgelist(g: Graph, allow_lossy: bool = False) -> str:
    if not g.nodes:
        raise ValueError("edge-list text needs at least one node")
    ids = g.node_ids
    if not all(isinstance(i, int) for i in ids):
        raise ValueError("edge-list text needs integer node ids")
    lo, hi = min(ids), max(ids)
    if hi - lo + 1 != len(ids):
        raise ValueError(f"edge-list text needs contiguous node ids {lo}..{hi}")
    _check_lossy(g, "edge-list text", weights=False, labels=False, timestamps=False, allow_lossy=allow_lossy)
    head = EDGELIST_PREAMBLE.format(n=len(ids), lo=lo, hi=hi, m=g.num_edges)
    return head + ",".join(f"[{e.source}, {e.target}]" for e in g.edges)


def parse_edgelist(text: str) -> Graph:
    """Read the prompt preamble plus ``[a, b]`` pairs.

    Pairs may be comma-separated on one line or one per line. The node
    numbering base comes from the ``numbered from X to Y`` clause.
    """
    m = _PREAMBLE_RE.match(text)
    if m is None:
        pos = len(text) - len(text.lstrip())
        raise GraphFormatError("missing edge-list preamble", pos, "'Graph G has <n> nodes, numbered from <lo> to <hi>.'")
    n, lo, hi, count = (int(m.group(k)) for k in ("n", "lo", "hi", "m"))
    if hi - lo + 1 != n:
        raise GraphFormatError(f"node count {n} disagrees with range {lo}..{hi}", m.start("n"))
    pos = m.end()
    edges = []
    expect_pair = True
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        if not expect_pair and text[pos] == ",":
            pos += 1
            expect_pair = True
            continue
        pm = _PAIR_RE.match(text, pos)
        if pm is None:
            raise GraphFormatError("unexpected text in edge list", pos, "'[a, b]'" if expect_pair else "',' or newline")
        a, b = int(pm.group(1)), int(pm.group(2))
        for end, offset in ((a, pm.start(1)), (b, pm.start(2))):
            if not lo <= end <= hi:
                raise GraphFormatError(f"edge endpoint {end} outside {lo}..{hi}", offset)
        edges.append(Edge(a, b))
        pos = pm.end()
        expect_pair = False
    if len(edges) != count:
        raise GraphFormatError(f"preamble announces {count} edges but {len(edges)} were listed", m.start("m"))
    return Graph(tuple(Node(i) for i in range(lo, hi + 1)), tuple(edges), directed=True)


# -- JSON ------------------------------------------------------------------


def _strip_trailing_commas(text: str) -> str:
    # language models often leave a comma before a closing bracket
    out = []
    in_str = False
    escaped = False
    i = 0
    while i < len(text):
        ch = text[i]
        if in_str:
            out.append(ch)
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
            out.append(ch)
        elif ch == ",":
            j = i + 1
            while j < len(text) and text[j].isspace():
                j += 1
            if j < len(text) and text[j] in "]}":
                i += 1
                continue
            out.append(ch)
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def _json_node_id(value, where: str) -> NodeId:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise GraphFormatError(f"{where} must be an integer or string, got {value!r}")
    if isinstance(value, str) and value.isdigit():
        return int(value)
    return value


def parse_json_graph(text: str) -> Graph:
    try:
        data = json.loads(_strip_trailing_commas(text))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(exc.msg, exc.pos) from None
    if not isinstance(data, dict) or "nodes" not in data or "edges" not in data:
        raise GraphFormatError("JSON graph must be an object with 'nodes' and 'edges'", 0, "'nodes' and 'edges' keys")
    if not isinstance(data["nodes"], list) or not isinstance(data["edges"], list):
        raise GraphFormatError("'nodes' and 'edges' must be arrays")
    nodes = []
    for i, item in enumerate(data["nodes"]):
        if not isinstance(item, dict) or "id" not in item:
            raise GraphFormatError(f"node #{i} lacks an 'id'")
        ts = item.get("timestamp")
        if ts is not None:
            try:
                ts = dt.date.fromisoformat(str(ts)[:10])
            except ValueError:
                raise GraphFormatError(f"node #{i} has an unreadable timestamp {ts!r}") from None
        label = item.get("label")
        nodes.append(Node(_json_node_id(item["id"], f"node #{i} id"), None if label is None else str(label), ts))
    edges = []
    for i, item in enumerate(data["edges"]):
        if not isinstance(item, dict) or "source" not in item or "target" not in item:
            raise GraphFormatError(f"edge #{i} needs 'source' and 'target'")
        weight = item.get("weight")
        if weight is not None and (isinstance(weight, bool) or not isinstance(weight, (int, float))):
            raise GraphFormatError(f"edge #{i} weight must be a number")
        edges.append(
            Edge(
                _json_node_id(item["source"], f"edge #{i} source"),
                _json_node_id(item["target"], f"edge #{i} target"),
                None if weight is None else float(weight),
            )
        )
    directed = data.get("directed", True)
    return Graph(tuple(nodes), tuple(edges), bool(directed))


def graph_to_dict(g: Graph) -> dict:
    nodes = []
    for n in g.nodes:
        item: dict = {"id": n.id}
        if n.label is not None:
            item["label"] = n.label
        if n.timestamp is not None:
            item["timestamp"] = n.timestamp.isoformat()
        nodes.append(item)
    edges = []
    for e in g.edges:
        item = {"source": e.source, "target": e.target}
        if e.weight is not None:
            item["weight"] = e.weight
        edges.append(item)
    return {"directed": g.directed, "nodes": nodes, "edges": edges}


def graph_from_dict(data: dict) -> Graph:
    return parse_json_graph(json.dumps(data))


def emit_json_graph(g: Graph, allow_lossy: bool = False) -> str:
    return json.dumps(graph_to_dict(g), indent=2)


# -- GraphML subset ---------------------------------------------------------

_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _graphml_id(raw: str) -> NodeId:
    m = re.fullmatch(r"n?(\d+)", raw)
    return int(m.group(1)) if m else raw


def parse_graphml(text: str) -> Graph:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        offset = sum(len(s) + 1 for s in text.split("\n")[: line - 1]) + col
        raise GraphFormatError(f"malformed XML: {exc}", offset) from None
    if _local(root.tag) != "graphml":
        raise GraphFormatError("root element is not <graphml>", 0, "<graphml>")
    graph_el = next((c for c in root if _local(c.tag) == "graph"), None)
    if graph_el is None:
        raise GraphFormatError("no <graph> element", None, "<graph>")
    directed = graph_el.get("edgedefault", "directed") != "undirected"
    nodes = []
    edges = []
    for child in graph_el:
        tag = _local(child.tag)
        if tag == "node":
            if child.get("id") is None:
                raise GraphFormatError("<node> without id", None, "id attribute")
            nodes.append(Node(_graphml_id(child.get("id"))))
        elif tag == "edge":
            src, tgt = child.get("source"), child.get("target")
            if src is None or tgt is None:
                raise GraphFormatError("<edge> without source/target", None, "source and target attributes")
            edges.append(Edge(_graphml_id(src), _graphml_id(tgt)))
    return Graph(tuple(nodes), tuple(edges), directed)


def emit_graphml(g: Graph, allow_lossy: bool = False) -> str:
    _check_lossy(g, "GraphML subset", weights=False, labels=False, timestamps=False, allow_lossy=allow_lossy)

    def ident(node: NodeId) -> str:
        return f"n{node}" if isinstance(node, int) else node

    for n in g.nodes:
        if isinstance(n.id, str) and re.fullmatch(r"n?\d+", n.id):
            raise ValueError(f"string node id {n.id!r} would read back as an integer")
    root = ET.Element("graphml", xmlns=_GRAPHML_NS)
    graph_el = ET.SubElement(root, "graph", id="G", edgedefault="directed" if g.directed else "undirected")
    for n in g.nodes:
        ET.SubElement(graph_el, "node", id=ident(n.id))
    for e in g.edges:
        ET.SubElement(graph_el, "edge", source=ident(e.source), target=ident(e.target))
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


# -- DOT subset --------------------------------------------------------------

_DOT_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*|/\*.*?\*/)
  | (?P<arrow>->|--)
  | (?P<punct>[{}\[\];,=])
  | (?P<quoted>"(?:[^"\\]|\\.)*")
  | (?P<number>-?(?:\d+\.\d*|\.\d+|\d+))(?![A-Za-z_])
  | (?P<ident>[A-Za-z_\x80-￿][A-Za-z_0-9\x80-￿]*)
    """,
    re.VERBOSE | re.DOTALL,
)


def _dot_tokens(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _DOT_TOKEN.match(text, pos)
        if m is None:
            raise GraphFormatError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


def _dot_value(kind: str, value: str) -> NodeId:
    if kind == "quoted":
        value = value[1:-1].replace('\\"', '"')
        return int(value) if value.isdigit() else value
    if kind == "number":
        if not value.isdigit():
            raise GraphFormatError(f"node id {value!r} must be a non-negative integer or a name")
        return int(value)
    return value


def parse_dot(text: str) -> Graph:
    toks = _dot_tokens(text)
    i = 0

    def peek() -> tuple[str, str, int]:
        return toks[i]

    def take(kind: str | None = None, value: str | None = None, expected: str = "") -> tuple[str, str, int]:
        nonlocal i
        tok = toks[i]
        if (kind is not None and tok[0] != kind) or (value is not None and tok[1] != value):
            raise GraphFormatError(f"unexpected {tok[1] or 'end of input'!r}", tok[2], expected or repr(value or kind))
        i += 1
        return tok

    head = peek()
    if head[0] == "ident" and head[1] == "strict":
        raise GraphFormatError("'strict' graphs are not supported", head[2])
    if head[0] != "ident" or head[1] not in ("graph", "digraph"):
        raise GraphFormatError("DOT input must start with 'graph' or 'digraph'", head[2], "'graph' or 'digraph'")
    take()
    directed = head[1] == "digraph"
    edge_op = "->" if directed else "--"
    if peek()[0] in ("ident", "quoted", "number"):
        take()
    take("punct", "{", "'{'")

    order: dict[NodeId, None] = {}
    edges: list[Edge] = []
    while True:
        tok = peek()
        if tok[0] == "punct" and tok[1] == "}":
            take()
            break
        if tok[0] == "punct" and tok[1] == ";":
            take()
            continue
        if tok[0] not in ("ident", "quoted", "number"):
            raise GraphFormatError(f"unexpected {tok[1] or 'end of input'!r}", tok[2], "node id or '}'")
        if tok[0] == "ident" and tok[1] in ("node", "edge", "graph", "subgraph"):
            raise GraphFormatError(f"'{tok[1]}' statements are not supported", tok[2])
        take()
        first = _dot_value(tok[0], tok[1])
        nxt = peek()
        if nxt[0] == "punct" and nxt[1] == "=":
            raise GraphFormatError("graph attributes are not supported", nxt[2])
        if nxt[0] == "arrow":
            if nxt[1] != edge_op:
                raise GraphFormatError(f"'{nxt[1]}' used in a {'digraph' if directed else 'graph'}", nxt[2], repr(edge_op))
            take()
            t2 = peek()
            if t2[0] not in ("ident", "quoted", "number"):
                raise GraphFormatError(f"unexpected {t2[1] or 'end of input'!r}", t2[2], "node id")
            take()
            second = _dot_value(t2[0], t2[1])
            if peek()[0] == "arrow":
                raise GraphFormatError("edge chains are not supported", peek()[2], "';' or '['")
            weight = None
            if peek()[0] == "punct" and peek()[1] == "[":
                attrs = _dot_attr_list(take, peek)
                unknown = set(attrs) - {"penwidth"}
                if unknown:
                    raise GraphFormatError(f"unsupported edge attribute(s) {sorted(unknown)}", tok[2])
                if "penwidth" in attrs:
                    try:
                        weight = float(attrs["penwidth"])
                    except ValueError:
                        raise GraphFormatError(f"penwidth must be numeric, got {attrs['penwidth']!r}", tok[2]) from None
            order.setdefault(first)
            order.setdefault(second)
            edges.append(Edge(first, second, weight))
        else:
            if nxt[0] == "punct" and nxt[1] == "[":
                raise GraphFormatError("node attributes are not supported", nxt[2])
            order.setdefault(first)
    trailing = peek()
    if trailing[0] != "eof":
        raise GraphFormatError("text after closing '}'", trailing[2], "end of input")
    return Graph(tuple(Node(n) for n in order), tuple(edges), directed)


def _dot_attr_list(take, peek) -> dict[str, str]:
    take("punct", "[", "'['")
    attrs: dict[str, str] = {}
    while True:
        tok = peek()
        if tok[0] == "punct" and tok[1] == "]":
            take()
            return attrs
        if tok[0] == "punct" and tok[1] in ",;":
            take()
            continue
        key = take("ident", expected="attribute name")[1]
        take("punct", "=", "'='")
        val = peek()
        if val[0] not in ("ident", "quoted", "number"):
            raise GraphFormatError(f"unexpected {val[1]!r}", val[2], "attribute value")
        take()
        attrs[key] = val[1][1:-1] if val[0] == "quoted" else val[1]


_PLAIN_ID = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_DOT_KEYWORDS = {"graph", "digraph", "node", "edge", "subgraph", "strict"}


def _dot_id(node: NodeId) -> str:
    if isinstance(node, int):
        return str(node)
    if _PLAIN_ID.fullmatch(node) and node.lower() not in _DOT_KEYWORDS:
        return node
    return '"' + node.replace('"', '\\"') + '"'


def _dot_number(value: float) -> str:
    text = repr(float(value))
    if text.endswith(".0"):
        text = text[:-2]
    return f'"{text}"' if "e" in text else text


def emit_dot(g: Graph, allow_lossy: bool = False, name: str = "G") -> str:
    _check_lossy(g, "DOT subset", weights=True, labels=False, timestamps=False, allow_lossy=allow_lossy)
    for n in g.nodes:
        if isinstance(n.id, str) and n.id.isdigit():
            raise ValueError(f"string node id {n.id!r} would read back as an integer")
    kind, op = ("digraph", "->") if g.directed else ("graph", "--")
    lines = [f"{kind} {name} {{"]
    lines += [f"    {_dot_id(n.id)};" for n in g.nodes]
    if g.nodes and g.edges:
        lines.append("")
    for e in g.edges:
        attr = "" if e.weight is None else f" [penwidth={_dot_number(e.weight)}]"
        lines.append(f"    {_dot_id(e.source)} {op} {_dot_id(e.target)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
