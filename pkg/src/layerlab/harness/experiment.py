"""Run prompt batches against a responder and summarize the outcomes."""

from __future__ import annotations

import csv
import json
import random
import time
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Any, Callable, Iterable, Sequence

from ..formats import GraphFormat, graph_from_dict, graph_to_dict, parse_graph
from ..generate import random_connected_graph
from ..graph import Graph
from ..render import render_histogram_svg
from .outcomes import RATIO_BUCKETS, Malformed, OutcomeKind, ScoreOutcome
from .parsing import TRANSPORT, SvgSummary, expected_nodes_for, parse_response
from .prompts import DEFAULT_CHAR_BUDGET, PromptBudgetError, PromptSpec, build_prompt
from .scoring import score
from .tasks import Strategy, TaskInstance, TaskKind, ground_truth, make_instances

# -- corpus ---------------------------------------------------------------------

DEFAULT_SIZES = (10, 11)


def standin_corpus(count: int = 200, seed: int = 0, sizes: Sequence[int] = DEFAULT_SIZES) -> dict[str, Graph]:
    """Seeded connected graphs shaped like the small benchmark graphs."""
    rng = random.Random(seed)
    corpus = {}
    for i in range(count):
        n = rng.choice(list(sizes))
        m = rng.randint(n - 1, min(n + 5, n * (n - 1) // 2))
        corpus[f"g{i:04d}"] = random_connected_graph(n, m, seed=rng.randrange(2**31))
    return corpus


def load_corpus(directory: str | Path, sizes: Sequence[int] | None = DEFAULT_SIZES) -> dict[str, Graph]:
    """Read every graph file under ``directory``, keeping the requested node counts."""
    corpus = {}
    for path in sorted(Path(directory).rglob("*")):
        if not path.is_file():
            continue
        try:
            fmt = GraphFormat.from_path(str(path))
        except ValueError:
            continue
        g = parse_graph(path.read_text(encoding="utf-8"), fmt)
        if sizes is None or g.num_nodes in sizes:
            corpus[path.stem] = g
    return corpus


# -- planning ---------------------------------------------------------------------


@dataclass
class Plan:
    specs: list[PromptSpec]
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (instance id, reason)


def plan_experiment(
    corpus: dict[str, Graph],
    tasks: Iterable[TaskKind | str],
    strategies: Iterable[Strategy | str],
    seed: int = 0,
    char_budget: int | None = DEFAULT_CHAR_BUDGET,
    **options: Any,
) -> Plan:
    """One spec per (task, strategy, instance); ICL pools are the task's other instances."""
    plan = Plan([])
    strategies = [s if isinstance(s, Strategy) else Strategy.parse(s) for s in strategies]
    for task in tasks:
        task = TaskKind(task)
        pool: list[TaskInstance] = []
        for gid, g in corpus.items():
            pool.extend(make_instances(task, gid, g, seed=seed, **options))
        for strategy in strategies:
            for inst in pool:
                try:
                    plan.specs.append(build_prompt(task, strategy, inst, pool, seed, char_budget))
                except (PromptBudgetError, ValueError) as exc:
                    plan.skipped.append((inst.id, str(exc)))
    return plan


def write_specs(specs: Iterable[PromptSpec], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for spec in specs:
            fh.write(json.dumps(spec.to_json(), sort_keys=True) + "\n")


def read_specs(path: str | Path) -> list[PromptSpec]:
    return [PromptSpec.from_json(rec) for rec in _read_jsonl(path)]


# -- records ----------------------------------------------------------------------


def encode_parsed(value: Any) -> Any:
    if isinstance(value, Malformed):
        return {"malformed": value.reason}
    if isinstance(value, Graph):
        return {"graph": graph_to_dict(value)}
    if isinstance(value, SvgSummary):
        return {"svg": {"node_count": value.node_count, "edge_count": value.edge_count,
                        "labels": list(value.labels), "warnings": list(value.warnings)}}
    if isinstance(value, dict):
        return {"ranks": [[k, v] for k, v in value.items()]}
    return value


def decode_parsed(value: Any) -> Any:
    if isinstance(value, dict):
        if "malformed" in value:
            return Malformed(value["malformed"])
        if "graph" in value:
            return graph_from_dict(value["graph"])
        if "svg" in value:
            s = value["svg"]
            return SvgSummary(s["node_count"], s["edge_count"], tuple(s["labels"]), tuple(s["warnings"]))
        if "ranks" in value:
            return {k: v for k, v in value["ranks"]}
    return value


@dataclass(frozen=True)
class ExperimentRecord:
    spec_id: str
    task: TaskKind
    strategy: str
    seed: int
    instance_id: str
    graph_id: str
    prompt: str
    response: str | None
    parsed: Any
    truth: Any
    outcome: ScoreOutcome
    model: str
    started: float
    finished: float
    attempts: int = 1
    error: str | None = None
    payload: dict = field(default_factory=dict, repr=False)

    @property
    def abs_error(self) -> float | None:
        return self.outcome.abs_error

    def to_json(self) -> dict:
        return {
            "spec_id": self.spec_id,
            "task": self.task.value,
            "strategy": self.strategy,
            "seed": self.seed,
            "instance_id": self.instance_id,
            "graph_id": self.graph_id,
            "prompt": self.prompt,
            "response": self.response,
            "parsed": encode_parsed(self.parsed),
            "truth": self.truth,
            "outcome": self.outcome.to_json(),
            "abs_error": self.abs_error,
            "model": self.model,
            "started": self.started,
            "finished": self.finished,
            "attempts": self.attempts,
            "error": self.error,
            "payload": self.payload,
        }

    @classmethod
    def from_json(cls, data: dict) -> ExperimentRecord:
        return cls(
            spec_id=data["spec_id"],
            task=TaskKind(data["task"]),
            strategy=data["strategy"],
            seed=data["seed"],
            instance_id=data["instance_id"],
            graph_id=data.get("graph_id", ""),
            prompt=data["prompt"],
            response=data["response"],
            parsed=decode_parsed(data["parsed"]),
            truth=data["truth"],
            outcome=ScoreOutcome.from_json(data["outcome"]),
            model=data.get("model", ""),
            started=data.get("started", 0.0),
            finished=data.get("finished", 0.0),
            attempts=data.get("attempts", 1),
            error=data.get("error"),
            payload=data.get("payload", {}),
        )


def rescore(record: ExperimentRecord) -> ScoreOutcome:
    """Recompute the outcome from the stored parsed value and truth."""
    if record.error is not None:
        return record.outcome
    return score(record.task, record.parsed, record.truth)


def reparse(record: ExperimentRecord) -> ExperimentRecord:
    """Parse and score the stored response again, e.g. after a parser change."""
    if record.error is not None or record.response is None:
        return record
    truth = ground_truth(record.task, record.payload) if record.payload else record.truth
    parsed = parse_response(record.task, record.response, expected_nodes_for(record.task, record.payload))
    return replace(record, parsed=parsed, truth=truth, outcome=score(record.task, parsed, truth))


def evaluate(spec: PromptSpec, response: str) -> tuple[Any, Any, ScoreOutcome]:
    truth = ground_truth(spec.task, spec.payload)
    parsed = parse_response(spec.task, response, expected_nodes_for(spec.task, spec.payload))
    return parsed, truth, score(spec.task, parsed, truth)


# -- running ----------------------------------------------------------------------


def _ask(spec: PromptSpec, responder, model: str, options: dict, clock: Callable[[], float]) -> ExperimentRecord:
    # imported here: llm depends on the harness, not the other way round
    from ..llm import ChatRequest, ReplayMissError, TransportError

    req = ChatRequest.for_prompt(
        spec.text,
        metadata={"spec_id": spec.id, "task": spec.task.value, "strategy": str(spec.strategy), "payload": spec.payload},
        model=model,
        **options,
    )
    started = clock()
    base = dict(
        spec_id=spec.id, task=spec.task, strategy=str(spec.strategy), seed=spec.seed,
        instance_id=spec.instance_id, graph_id=spec.graph_id, prompt=spec.text, model=model, started=started,
        payload=spec.payload,
    )
    try:
        resp = responder.complete(req)
    except (TransportError, ReplayMissError) as exc:
        truth = ground_truth(spec.task, spec.payload)
        attempts = getattr(exc, "attempts", 1)
        return ExperimentRecord(
            **base, response=None, parsed=Malformed(TRANSPORT), truth=truth,
            outcome=ScoreOutcome.malformed(TRANSPORT), finished=clock(), attempts=attempts,
            error=f"{type(exc).__name__}: {exc}",
        )
    parsed, truth, outcome = evaluate(spec, resp.content)
    return ExperimentRecord(
        **base, response=resp.content, parsed=parsed, truth=truth, outcome=outcome,
        finished=clock(), attempts=resp.attempts,
    )


def run_experiment(
    specs: Sequence[PromptSpec],
    responder,
    sink: str | Path | IO[str] | None = None,
    max_concurrency: int = 1,
    model: str = "gpt-3.5-turbo",
    request_options: dict | None = None,
    clock: Callable[[], float] = time.time,
) -> list[ExperimentRecord]:
    """Send every spec in a fresh thread and score the answers.

    Records are appended to ``sink`` as soon as every earlier spec has
    finished, so the transcript is always in spec order and a crash loses
    at most the in-flight tail.
    """
    if max_concurrency < 1:
        raise ValueError("max_concurrency must be >= 1")
    options = request_options or {}
    own = isinstance(sink, (str, Path))
    fh: IO[str] | None = open(sink, "a", encoding="utf-8") if own else sink
    records: list[ExperimentRecord] = []
    try:
        with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
            futures = [pool.submit(_ask, spec, responder, model, options, clock) for spec in specs]
            for fut in futures:
                rec = fut.result()
                records.append(rec)
                if fh is not None:
                    fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
                    fh.flush()
    finally:
        if own and fh is not None:
            fh.close()
    return records


def _read_jsonl(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def read_records(path: str | Path) -> list[ExperimentRecord]:
    return [ExperimentRecord.from_json(rec) for rec in _read_jsonl(path)]


# -- reports ----------------------------------------------------------------------


def bucket_order(task: TaskKind) -> tuple[str, ...]:
    task = TaskKind(task)
    if task is TaskKind.LAYER_ASSIGNMENT:
        return RATIO_BUCKETS + ("Malformed",)
    if task is TaskKind.SORT_LAYERS:
        return ("fewer", "equal", "more", "Malformed")
    if task.is_numeric or task in (TaskKind.PROPERTY_CHECK, TaskKind.SVG_FROM_DOT):
        return ("Correct", "IncorrectOver", "IncorrectUnder", "Malformed")
    return ("Correct",) + RATIO_BUCKETS[:-1] + ("Malformed",)


def outcome_counts(records: Iterable[ExperimentRecord]) -> dict[tuple[str, str], Counter]:
    counts: dict[tuple[str, str], Counter] = defaultdict(Counter)
    for rec in records:
        counts[(rec.task.value, rec.strategy)][rec.outcome.label()] += 1
    return dict(counts)


def mean_abs_error(records: Iterable[ExperimentRecord]) -> dict[tuple[str, str], tuple[int, float | None]]:
    """Mean absolute error over wrong but parseable numeric answers."""
    errors: dict[tuple[str, str], list[float]] = defaultdict(list)
    for rec in records:
        if rec.task.is_numeric:
            key = (rec.task.value, rec.strategy)
            errors.setdefault(key, [])
            if rec.outcome.kind in (OutcomeKind.INCORRECT_OVER, OutcomeKind.INCORRECT_UNDER):
                errors[key].append(rec.outcome.abs_error)
    return {k: (len(v), sum(v) / len(v) if v else None) for k, v in errors.items()}


def paired_outcomes(records: Iterable[ExperimentRecord], first: str, second: str) -> dict[str, Counter]:
    """Per task, how the same instance fared under two strategies.

    Keys of each counter are ``"<first label>|<second label>"``; only
    instances asked under both strategies are counted.
    """
    by_key: dict[tuple[str, str], dict[str, str]] = defaultdict(dict)
    for rec in records:
        kind = Strategy.parse(rec.strategy).kind
        by_key[(rec.task.value, rec.instance_id)][kind] = "Correct" if rec.outcome.is_correct else rec.outcome.label()
    out: dict[str, Counter] = defaultdict(Counter)
    for (task, _), seen in by_key.items():
        if first in seen and second in seen:
            out[task][f"{seen[first]}|{seen[second]}"] += 1
    return dict(out)


def write_reports(records: Sequence[ExperimentRecord], out_dir: str | Path) -> list[Path]:
    """report.csv, errors.csv, pairings.csv and one histogram SVG per (task, strategy)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    counts = outcome_counts(records)

    path = out / "report.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["task", "strategy", "outcome", "count"])
        for (task, strategy), c in sorted(counts.items()):
            order = bucket_order(TaskKind(task))
            for label in order + tuple(sorted(set(c) - set(order))):
                w.writerow([task, strategy, label, c.get(label, 0)])
    written.append(path)

    path = out / "errors.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["task", "strategy", "incorrect", "mean_abs_error"])
        for (task, strategy), (n, mae) in sorted(mean_abs_error(records).items()):
            w.writerow([task, strategy, n, "" if mae is None else f"{mae:.4f}"])
    written.append(path)

    path = out / "pairings.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["task", "first", "second", "first_outcome", "second_outcome", "count"])
        for first, second in (("steps", "icl"), ("standard", "icl"), ("standard", "steps")):
            for task, c in sorted(paired_outcomes(records, first, second).items()):
                for key, n in sorted(c.items()):
                    a, b = key.split("|")
                    w.writerow([task, first, second, a, b, n])
    written.append(path)

    for (task, strategy), c in sorted(counts.items()):
        order = bucket_order(TaskKind(task))
        buckets = [(label, c.get(label, 0)) for label in order + tuple(sorted(set(c) - set(order)))]
        if not any(n for _, n in buckets):
            continue
        doc = render_histogram_svg(buckets, f"{task} / {strategy}")
        safe = strategy.replace("(", "").replace(")", "")
        path = out / f"hist_{task}_{safe}.svg"
        path.write_text(doc.text, encoding="utf-8")
        written.append(path)
    return written
