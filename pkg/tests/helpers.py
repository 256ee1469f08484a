"""Shared test scaffolding: sample factories and scripted backends."""

from __future__ import annotations

from bsm.backends.base import CompletionRequest, CompletionResult
from bsm.backends.mock import MockBackend, MockRule, MockScript
from bsm.judge.types import EvalSample

# anchors a rule to whichever response was encoded first in a judge prompt
FIRST_SLOT = r"(?s)\[Assistant A's (?:First )?Response\]\n[^\n]*"

BRANCH_TEXT = (
    "1. Relevance: How well the answer addresses the question.\n"
    "2. Clarity: How easy the answer is to follow."
)


def branch_rule(text: str = BRANCH_TEXT) -> MockRule:
    return MockRule(pattern="Propose a list of up to", response=text)


def pair_rule(first_marker: str, other_marker: str, response: str) -> MockRule:
    """Rule matching prompts where first_marker's response is encoded first."""
    return MockRule(
        pattern=f"{FIRST_SLOT}{first_marker}.*{other_marker}", response=response, regex=True
    )


def make_sample(
    question_id: str = "q1",
    category: str = "writing",
    turn: int = 1,
    question_1: str = "How should I plan a weekend trip on a small budget?",
    model_a: str = "model-a",
    model_b: str = "model-b",
    response_a_1: str = "Take the alphatrain and pack light.",
    response_b_1: str = "Book the betabus early and split lodging.",
    **kwargs,
) -> EvalSample:
    if turn == 2:
        kwargs.setdefault("question_2", "Now adapt the plan for winter.")
        kwargs.setdefault("response_a_2", "In winter the alphatrain still runs cheap.")
        kwargs.setdefault("response_b_2", "Winter betabus fares drop by half.")
    return EvalSample(
        question_id=question_id,
        category=category,
        turn=turn,
        question_1=question_1,
        model_a=model_a,
        model_b=model_b,
        response_a_1=response_a_1,
        response_b_1=response_b_1,
        **kwargs,
    )


def mock_backend(*rules: MockRule, default: str = "") -> MockBackend:
    return MockBackend(MockScript(rules=tuple(rules), default_response=default))


class SequenceBackend:
    """Returns queued responses in call order; records every prompt.

    For exercising per-call variation (sampling methods) that a
    prompt-keyed script cannot produce.
    """

    backend_id = "sequence"

    def __init__(self, texts: list[str]):
        self._texts = list(texts)
        self.prompts: list[str] = []

    def complete(self, request: CompletionRequest) -> CompletionResult:
        self.prompts.append(request.prompt)
        if not self._texts:
            raise AssertionError("SequenceBackend exhausted")
        return CompletionResult(text=self._texts.pop(0), backend_id=self.backend_id)
