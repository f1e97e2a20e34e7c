"""Score outcome categories shared by the parser, the scorer and reports."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum


class OutcomeKind(str, Enum):
    CORRECT = "Correct"
    INCORRECT_OVER = "IncorrectOver"
    INCORRECT_UNDER = "IncorrectUnder"
    MALFORMED = "Malformed"
    PARTIAL_RATIO = "PartialRatio"
    ORDERING_DELTA = "OrderingDelta"


class Delta(str, Enum):
    FEWER = "fewer"
    EQUAL = "equal"
    MORE = "more"


@dataclass(frozen=True)
class Malformed:
    """Parser result when no well-formed answer can be extracted."""

    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class ScoreOutcome:
    """One scored answer.

    Only the fields relevant to ``kind`` are set: ``fraction`` for partial
    ratios, ``delta`` for orderings, ``reason`` for malformed answers and
    ``abs_error`` for wrong numeric answers. ``valid`` tracks whether a
    parsed layering is itself valid, ``exact`` whether an ordering equals
    the oracle's.
    """

    kind: OutcomeKind
    fraction: float | None = None
    delta: Delta | None = None
    reason: str | None = None
    abs_error: float | None = None
    valid: bool | None = None
    exact: bool | None = None
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.fraction is not None and not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"fraction {self.fraction} outside [0, 1]")

    @classmethod
    def correct(cls, **extra) -> ScoreOutcome:
        return cls(OutcomeKind.CORRECT, **extra)

    @classmethod
    def malformed(cls, reason: str) -> ScoreOutcome:
        return cls(OutcomeKind.MALFORMED, reason=reason)

    @classmethod
    def partial(cls, fraction: float, **extra) -> ScoreOutcome:
        return cls(OutcomeKind.PARTIAL_RATIO, fraction=fraction, **extra)

    @classmethod
    def ordering(cls, delta: Delta, **extra) -> ScoreOutcome:
        return cls(OutcomeKind.ORDERING_DELTA, delta=Delta(delta), **extra)

    @property
    def is_correct(self) -> bool:
        """Fully right: Correct, ratio 1.0, or an ordering equal to the oracle's."""
        if self.kind is OutcomeKind.CORRECT:
            return True
        if self.kind is OutcomeKind.PARTIAL_RATIO:
            return self.fraction == 1.0
        if self.kind is OutcomeKind.ORDERING_DELTA:
            return bool(self.exact)
        return False

    def label(self) -> str:
        """Histogram bucket name."""
        if self.kind is OutcomeKind.PARTIAL_RATIO:
            return ratio_bucket(self.fraction)
        if self.kind is OutcomeKind.ORDERING_DELTA:
            return self.delta.value
        return self.kind.value

    def to_json(self) -> dict:
        data = {k: v for k, v in asdict(self).items() if v is not None and v != ()}
        data["kind"] = self.kind.value
        if self.delta is not None:
            data["delta"] = self.delta.value
        if self.warnings:
            data["warnings"] = list(self.warnings)
        return data

    @classmethod
    def from_json(cls, data: dict) -> ScoreOutcome:
        data = dict(data)
        kind = OutcomeKind(data.pop("kind"))
        if "delta" in data:
            data["delta"] = Delta(data["delta"])
        if "warnings" in data:
            data["warnings"] = tuple(data["warnings"])
        return cls(kind, **data)


RATIO_BUCKETS = ("0-25%", "25-50%", "50-75%", "75-99%", "100%")


def ratio_bucket(fraction: float) -> str:
    if fraction >= 1.0:
        return "100%"
    if fraction >= 0.75:
        return "75-99%"
    if fraction >= 0.5:
        return "50-75%"
    if fraction >= 0.25:
        return "25-50%"
    return "0-25%"
