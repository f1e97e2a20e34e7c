"""Command-line entry point.

Each subcommand reads and writes plain files so stages compose:
``generate``/``convert`` produce graphs, ``layout`` and ``metrics`` run the
engine, ``prompts`` → ``run`` → ``score`` → ``report`` drive an experiment.

Exit codes: 0 ok, 1 usage, 2 unreadable input, 3 infeasible request,
4 transport failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from pathlib import Path
from typing import Sequence

from .formats import GraphFormat, GraphFormatError, LossyEmissionError, emit_graph, parse_graph
from .generate import AttributeSpec, InfeasibleGraphError, generate_random_graph
from .graph import Graph, GraphError
from .harness.experiment import (
    load_corpus,
    plan_experiment,
    read_records,
    read_specs,
    reparse,
    run_experiment,
    standin_corpus,
    write_reports,
    write_specs,
)
from .harness.prompts import DEFAULT_CHAR_BUDGET
from .harness.tasks import ICL_K_RANGE, Strategy, TaskKind
from .layout import LayeredOrdering, LayoutError, count_crossings_total, layout_pipeline, total_edge_length
from .render import render_layout_svg

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_TRANSPORT = range(5)


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which means "parse error" here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def read_graph(path: str, fmt: str | None) -> Graph:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        kind = GraphFormat(fmt) if fmt else GraphFormat.from_path(path)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        return parse_graph(raw, kind)
    except GraphFormatError as exc:
        where = path
        if exc.position is not None:
            line, col = _line_col(raw.decode("utf-8", errors="replace"), exc.position)
            where = f"{path}:{line}:{col}"
        raise InputError(f"{where}: {exc}") from None


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _node_arg(raw: str | None):
    if raw is None:
        return None
    return int(raw) if raw.lstrip("-").isdigit() else raw


def _json_dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


# -- commands ---------------------------------------------------------------------


def cmd_convert(args) -> int:
    g = read_graph(args.input, args.format)
    try:
        text = emit_graph(g, args.to, allow_lossy=args.allow_lossy)
    except LossyEmissionError as exc:
        raise UsageError(f"{exc}; pass --allow-lossy to drop it") from None
    except ValueError as exc:
        raise InfeasibleGraphError(str(exc)) from None
    _write(text, args.out)
    return EXIT_OK


def cmd_layout(args) -> int:
    g = read_graph(args.input, args.format)
    source = _node_arg(args.source)
    if source is None:
        source = g.node_ids[0] if g.nodes else None
    if source not in g:
        raise UsageError(f"source {args.source!r} is not a node of {args.input}")
    result = layout_pipeline(g, source, args.passes, args.direction, args.spacing, args.orientation)
    doc = render_layout_svg(result.pruned, result.positions)
    summary = {
        "source": source,
        "ranks": [[n, result.ranks[n]] for n in result.ranks.order],
        "initial": result.initial.to_lists(),
        "layers": result.ordering.to_lists(),
        "removed_edges": [[e.source, e.target] for e in result.removed_edges],
        "crossings_before": result.crossings_before,
        "crossings_after": result.crossings_after,
        "edge_length": total_edge_length(result.ranks, result.pruned),
        "positions": [[n, *result.positions[n]] for n in result.ordering.nodes()],
    }
    if args.out is None:
        sys.stdout.write(_json_dump(summary))
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "layout.json").write_text(_json_dump(summary), encoding="utf-8")
        (out / "ranks.json").write_text(_json_dump({"ranks": summary["ranks"]}), encoding="utf-8")
        (out / "ordering.json").write_text(_json_dump({"layers": summary["layers"]}), encoding="utf-8")
        (out / "pruned.json").write_text(emit_graph(result.pruned, GraphFormat.JSON, allow_lossy=True) + "\n", encoding="utf-8")
        (out / "layout.svg").write_text(doc.text, encoding="utf-8")
    for w in doc.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _read_layers(path: str) -> list[list]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(data, dict) and "layers" in data:
        return data["layers"]
    if isinstance(data, dict) and "ranks" in data:
        ranks = dict((n, r) for n, r in data["ranks"]) if isinstance(data["ranks"], list) else data["ranks"]
        layers: list[list] = [[] for _ in range(max(ranks.values(), default=-1) + 1)]
        for n, r in ranks.items():
            layers[r].append(_node_arg(n) if isinstance(n, str) else n)
        return layers
    if isinstance(data, list):
        return data
    raise InputError(f"{path}: expected {{'layers': [...]}} or {{'ranks': ...}}")


def cmd_metrics(args) -> int:
    g = read_graph(args.input, args.format)
    layers = _read_layers(args.ordering)
    try:
        lo = LayeredOrdering(layers)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{args.ordering}: {exc}") from None
    want_cross = args.crossings or not args.edge_length
    want_len = args.edge_length or not args.crossings
    result = {}
    if want_cross:
        report = count_crossings_total(lo, g)
        result["crossings"] = report.total
        result["per_gap"] = [list(p) for p in report.per_gap]
    if want_len:
        result["edge_length"] = total_edge_length(lo.layer_of(), g)
    if args.crossings and not args.edge_length:
        sys.stdout.write(f"{result['crossings']}\n")
    elif args.edge_length and not args.crossings:
        sys.stdout.write(f"{result['edge_length']}\n")
    else:
        sys.stdout.write(_json_dump(result))
    return EXIT_OK


def _strategy(args) -> Strategy:
    if args.icl_k is not None and args.strategy != "icl":
        raise UsageError("--icl-k only applies to --strategy icl")
    return Strategy(args.strategy, args.icl_k)


def _sizes(raw: str | None):
    if raw in (None, ""):
        return (10, 11)
    if raw == "all":
        return None
    try:
        return tuple(int(x) for x in raw.split(","))
    except ValueError:
        raise UsageError(f"--sizes expects comma-separated integers or 'all', got {raw!r}") from None


def cmd_prompts(args) -> int:
    sizes = _sizes(args.sizes)
    if args.standin:
        corpus = standin_corpus(args.standin, args.seed, sizes or (10, 11))
    else:
        corpus = {}
        for item in args.inputs:
            p = Path(item)
            if p.is_dir():
                corpus.update(load_corpus(p, sizes))
            else:
                g = read_graph(item, args.format)
                if sizes is None or g.num_nodes in sizes:
                    corpus[p.stem] = g
    if not corpus:
        raise UsageError("no graphs selected; pass graph files, a directory, or --standin N")
    options = {}
    if args.source is not None:
        options["source"] = _node_arg(args.source)
    tasks = [TaskKind(t) for t in args.task]
    plan = plan_experiment(corpus, tasks, [_strategy(args)], args.seed, args.char_budget, **options)
    for inst, reason in plan.skipped:
        print(f"skipped {inst}: {reason}", file=sys.stderr)
    if args.out in (None, "-"):
        for spec in plan.specs:
            sys.stdout.write(json.dumps(spec.to_json(), sort_keys=True) + "\n")
    else:
        write_specs(plan.specs, args.out)
    print(f"{len(plan.specs)} prompts, {len(plan.skipped)} skipped", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    from .llm import AdaptiveLimiter, CredentialsError, make_responder

    specs = read_specs(args.specs)
    try:
        responder = make_responder(
            args.responder,
            noise_rate=args.noise_rate,
            seed=args.seed,
            transcript=args.transcript,
            endpoint=args.endpoint,
            limiter=AdaptiveLimiter(args.max_concurrency),
        )
    except CredentialsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None
    if args.out not in (None, "-"):
        Path(args.out).write_text("", encoding="utf-8")  # a run starts a fresh transcript
    sink = sys.stdout if args.out in (None, "-") else args.out
    records = run_experiment(
        specs, responder, sink, max_concurrency=args.max_concurrency, model=args.model,
        request_options={"temperature": args.temperature},
    )
    failed = [r for r in records if r.error is not None]
    for r in failed:
        print(f"transport failure on {r.spec_id}: {r.error}", file=sys.stderr)
    return EXIT_TRANSPORT if failed else EXIT_OK


def cmd_score(args) -> int:
    try:
        records = read_records(args.transcript)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InputError(f"{args.transcript}: not a transcript ({exc})") from None
    lines = [json.dumps(reparse(r).to_json(), sort_keys=True) + "\n" for r in records]
    _write("".join(lines), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        records = read_records(args.scored)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InputError(f"{args.scored}: not a transcript ({exc})") from None
    if not records:
        raise InputError(f"{args.scored}: no records")
    for path in write_reports(records, args.out):
        print(path, file=sys.stderr)
    return EXIT_OK


def _date_range(raw: str | None):
    if raw is None:
        return None
    try:
        first, last = raw.split(":")
        return dt.date.fromisoformat(first), dt.date.fromisoformat(last)
    except ValueError:
        raise UsageError(f"--timestamps expects FIRST:LAST ISO dates, got {raw!r}") from None


def cmd_generate(args) -> int:
    attrs = AttributeSpec(timestamp_range=_date_range(args.timestamps), weight_above=args.weight_above)
    g = generate_random_graph(
        args.nodes, args.edges, attrs, seed=args.seed, simple=not args.multi, first_id=args.first_id
    )
    fmt = GraphFormat(args.format) if args.format else (GraphFormat.from_path(args.out) if args.out else GraphFormat.JSON)
    try:
        text = emit_graph(g, fmt)
    except LossyEmissionError as exc:
        raise UsageError(f"{exc}; choose json for attributed graphs") from None
    _write(text if text.endswith("\n") else text + "\n", args.out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="layerlab", description="Layered graph drawing oracle and LLM prompt harness.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    formats = [f.value for f in GraphFormat]

    c = sub.add_parser("convert", help="convert a graph between formats")
    c.add_argument("input")
    c.add_argument("--format", choices=formats, help="input format (default: from suffix)")
    c.add_argument("--to", choices=formats, required=True)
    c.add_argument("--allow-lossy", action="store_true")
    c.add_argument("--out")
    c.set_defaults(func=cmd_convert)

    c = sub.add_parser("layout", help="BFS layering, median sweep, coordinates and SVG")
    c.add_argument("input")
    c.add_argument("--format", choices=formats)
    c.add_argument("--source")
    c.add_argument("--passes", type=int, default=1)
    c.add_argument("--direction", choices=["down", "up", "alternate"], default="down")
    c.add_argument("--spacing", type=float, default=100.0)
    c.add_argument("--orientation", choices=["horizontal", "vertical"], default="horizontal")
    c.add_argument("--out", help="output directory (default: JSON summary on stdout)")
    c.set_defaults(func=cmd_layout)

    c = sub.add_parser("metrics", help="crossings and edge length of a layering")
    c.add_argument("input")
    c.add_argument("--format", choices=formats)
    c.add_argument("--ordering", required=True, help="JSON with 'layers' or 'ranks'")
    c.add_argument("--crossings", action="store_true")
    c.add_argument("--edge-length", action="store_true")
    c.set_defaults(func=cmd_metrics)

    c = sub.add_parser("prompts", help="render prompt specs for a graph set")
    c.add_argument("inputs", nargs="*")
    c.add_argument("--format", choices=formats)
    c.add_argument("--standin", type=int, metavar="N", help="use N seeded stand-in graphs instead of files")
    c.add_argument("--sizes", help="node counts to keep, e.g. 10,11 (default) or 'all'")
    c.add_argument("--task", action="append", required=True, choices=[t.value for t in TaskKind])
    c.add_argument("--strategy", choices=["standard", "steps", "icl"], default="standard")
    c.add_argument("--icl-k", type=int, choices=range(ICL_K_RANGE[0], ICL_K_RANGE[1] + 1))
    c.add_argument("--source")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--char-budget", type=int, default=DEFAULT_CHAR_BUDGET)
    c.add_argument("--out")
    c.set_defaults(func=cmd_prompts)

    c = sub.add_parser("run", help="send prompt specs to a responder")
    c.add_argument("specs")
    c.add_argument("--responder", choices=["http", "oracle", "noisy", "replay"], default="oracle")
    c.add_argument("--noise-rate", type=float, default=0.3)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--endpoint")
    c.add_argument("--transcript", help="recorded transcript for --responder replay")
    c.add_argument("--model", default="gpt-3.5-turbo")
    c.add_argument("--temperature", type=float, default=0.0)
    c.add_argument("--max-concurrency", type=int, default=1)
    c.add_argument("--out")
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("score", help="re-parse and re-score a transcript")
    c.add_argument("transcript")
    c.add_argument("--out")
    c.set_defaults(func=cmd_score)

    c = sub.add_parser("report", help="CSV summaries and SVG histograms")
    c.add_argument("scored")
    c.add_argument("--out", default="report")
    c.set_defaults(func=cmd_report)

    c = sub.add_parser("generate", help="random graph with count/date/weight constraints")
    c.add_argument("--nodes", type=int, required=True)
    c.add_argument("--edges", type=int, required=True)
    c.add_argument("--timestamps", metavar="FIRST:LAST")
    c.add_argument("--weight-above", type=float)
    c.add_argument("--multi", action="store_true", help="allow parallel edges")
    c.add_argument("--first-id", type=int, default=0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--format", choices=formats)
    c.add_argument("--out")
    c.set_defaults(func=cmd_generate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "max_concurrency", 1) < 1:
        print("error: --max-concurrency must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InfeasibleGraphError, LayoutError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
