"""Prompt construction, answer parsing, scoring and experiment running."""

from .outcomes import Delta, Malformed, OutcomeKind, ScoreOutcome
from .parsing import parse_response
from .prompts import PromptBudgetError, PromptSpec, build_prompt, format_answer, sample_icl_examples
from .scoring import score, score_scene_graph
from .tasks import STANDARD, STEPS, Strategy, TaskInstance, TaskKind, ground_truth, make_instances, oracle_value

__all__ = [
    "Delta",
    "Malformed",
    "OutcomeKind",
    "PromptBudgetError",
    "PromptSpec",
    "STANDARD",
    "STEPS",
    "ScoreOutcome",
    "Strategy",
    "TaskInstance",
    "TaskKind",
    "build_prompt",
    "format_answer",
    "ground_truth",
    "make_instances",
    "oracle_value",
    "parse_response",
    "sample_icl_examples",
    "score",
    "score_scene_graph",
]
