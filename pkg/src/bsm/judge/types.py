"""Domain types for pairwise response judging."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from bsm.errors import ScoreOutOfRange

MT_BENCH_CATEGORIES = (
    "writing",
    "roleplay",
    "reasoning",
    "math",
    "coding",
    "extraction",
    "stem",
    "humanities",
)


class Position(str, Enum):
    """Positional verdict, relative to the encoding order of one run."""

    FIRST = "first"
    SECOND = "second"
    TIE = "tie"


class FinalVerdict(str, Enum):
    """Absolute verdict over the actual response identities."""

    A = "A"
    B = "B"
    TIE = "tie"


@dataclass(frozen=True)
class Scale:
    """Scoring scale for per-criterion judgments; (1,5) or (1,10)."""

    lo: int = 1
    hi: int = 5

    def __post_init__(self) -> None:
        if (self.lo, self.hi) not in ((1, 5), (1, 10)):
            raise ValueError(f"unsupported scale ({self.lo}, {self.hi})")

    def as_tuple(self) -> tuple[int, int]:
        return (self.lo, self.hi)


@dataclass(frozen=True)
class Criterion:
    """One evaluation criterion: short title plus how to assess it."""

    title: str
    description: str = ""

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise ValueError("criterion title must be non-empty")


@dataclass(frozen=True)
class BranchPlan:
    """Ordered criteria produced by one branch call, plus the raw completion."""

    criteria: tuple[Criterion, ...]
    raw_text: str = ""

    def __post_init__(self) -> None:
        if not self.criteria:
            raise ValueError("a branch plan needs at least one criterion")

    def __len__(self) -> int:
        return len(self.criteria)


@dataclass(frozen=True)
class CriterionJudgment:
    """Score pair for one criterion; scores follow the run's encoding order."""

    criterion: Criterion
    score_first: int
    score_second: int
    explanation: str
    scale: Scale

    def __post_init__(self) -> None:
        for score in (self.score_first, self.score_second):
            if not (self.scale.lo <= score <= self.scale.hi):
                raise ScoreOutOfRange(
                    f"score {score} outside scale {self.scale.as_tuple()} "
                    f"for criterion {self.criterion.title!r}"
                )


@dataclass(frozen=True)
class RunVerdict:
    """Outcome of one encoding-order run; totals present for sum-merges."""

    position: Position
    total_first: Optional[Union[int, float]] = None
    total_second: Optional[Union[int, float]] = None

    def __post_init__(self) -> None:
        if self.total_first is not None and self.total_second is not None:
            expected = (
                Position.FIRST
                if self.total_first > self.total_second
                else Position.SECOND
                if self.total_second > self.total_first
                else Position.TIE
            )
            if self.position is not expected:
                raise ValueError("run verdict inconsistent with its totals")


@dataclass(frozen=True)
class EvalSample:
    """One pairwise judging instance: a question turn and two model responses.

    Turn-1 samples carry only the first exchange; turn-2 samples carry the
    full two-turn conversation for both models.
    """

    question_id: str
    category: str
    turn: int
    question_1: str
    model_a: str
    model_b: str
    response_a_1: str
    response_b_1: str
    question_2: Optional[str] = None
    response_a_2: Optional[str] = None
    response_b_2: Optional[str] = None
    reference_answer: Optional[str] = None

    def __post_init__(self) -> None:
        if self.category not in MT_BENCH_CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        if self.turn not in (1, 2):
            raise ValueError("turn must be 1 or 2")
        if self.model_a == self.model_b:
            raise ValueError("model_a and model_b must differ")
        if self.turn == 2:
            if self.question_2 is None or self.response_a_2 is None or self.response_b_2 is None:
                raise ValueError("turn-2 samples need the follow-up question and responses")

    @property
    def key(self) -> tuple[str, int, str, str]:
        return (self.question_id, self.turn, self.model_a, self.model_b)

    @property
    def sample_id(self) -> str:
        return f"{self.question_id}:{self.turn}:{self.model_a}:{self.model_b}"

    def judged_responses(self) -> tuple[str, str]:
        """The turn-relevant response pair (A's text, B's text)."""
        if self.turn == 1:
            return (self.response_a_1, self.response_b_1)
        return (self.response_a_2, self.response_b_2)  # type: ignore[return-value]

    def responses_for(self, identity: str) -> tuple[str, Optional[str]]:
        if identity == "A":
            return (self.response_a_1, self.response_a_2)
        if identity == "B":
            return (self.response_b_1, self.response_b_2)
        raise ValueError(f"identity must be 'A' or 'B', got {identity!r}")
