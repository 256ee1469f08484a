"""Deterministic scripted backend for offline runs and tests."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from bsm.backends.base import CompletionRequest, CompletionResult


@dataclass(frozen=True)
class MockRule:
    """One matcher/response pair. Substring match by default, regex opt-in."""

    pattern: str
    response: str
    regex: bool = False

    def matches(self, prompt: str) -> bool:
        if self.regex:
            return re.search(self.pattern, prompt) is not None
        return self.pattern in prompt


@dataclass(frozen=True)
class MockScript:
    """Ordered first-match-wins response script over prompt text."""

    rules: tuple[MockRule, ...] = ()
    default_response: str = ""

    def respond(self, prompt: str) -> str:
        for rule in self.rules:
            if rule.matches(prompt):
                return rule.response
        return self.default_response

    @classmethod
    def from_rules(cls, rules: Iterable[tuple[str, str]], default: str = "") -> "MockScript":
        return cls(tuple(MockRule(p, r) for p, r in rules), default)

    @classmethod
    def from_dict(cls, data: dict) -> "MockScript":
        rules = tuple(
            MockRule(
                pattern=entry["match"],
                response=entry["response"],
                regex=bool(entry.get("regex", False)),
            )
            for entry in data.get("rules", [])
        )
        return cls(rules, data.get("default", ""))

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScript":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


class MockBackend:
    """Answers from a fixed script; stateless, so safe under any scheduling."""

    backend_id = "mock"

    def __init__(self, script: MockScript):
        self._script = script

    def complete(self, request: CompletionRequest) -> CompletionResult:
        text = self._script.respond(request.prompt)
        return CompletionResult(text=text, backend_id=self.backend_id, cached=False, latency_ms=0)
