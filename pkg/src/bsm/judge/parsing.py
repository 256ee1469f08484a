"""Parsers that recover structure from free-form judge completions.

Completions are never trusted: criteria lists, score pairs, and verdict
tokens are extracted with fixed precedence rules, and anything
unrecoverable raises instead of being guessed at.
"""

from __future__ import annotations

import re

from bsm.errors import ParseFailure, ScoreParseFailure, VerdictParseFailure
from bsm.judge.types import Criterion, Position

_ITEM_RE = re.compile(r"^\s*(?:\d+\s*[.):]|[-*•])\s+(.*)$")
_TITLE_STRIP = " \t*_#`'\""

_LABELED_RE = re.compile(
    r"(?i)\b(?:total\s+(?:score\s+)?(?:for\s+)?)?"
    r"(?:assistant\s+|response\s+|model\s+|story\s+)?([ab])\s*[:=]\s*(\d+)"
)
_LABELED_FRACTION_RE = re.compile(
    r"(?i)\b(?:assistant|response|model|story)\s+([ab])\b[^\n/]*?(\d+)\s*/\s*\d+"
)
_FRACTION_RE = re.compile(r"\b(\d+)\s*/\s*(\d+)\b")
_OUT_OF_RE = re.compile(r"(?i)\bout\s+of\s+\d+\b")
_INT_RE = re.compile(r"\b\d+\b")

_VERDICT_RE = re.compile(
    r"(?i)\bverdict\b\s*(?:is|:|-)?\s*[*\[\"']*\s*"
    r"(?:assistant\s+|response\s+|story\s+|option\s+)?([ab]|tie)\b"
)
_BRACKET_RE = re.compile(r"(?i)\[\[\s*(?:assistant\s+|response\s+|story\s+)?([ab]|c|tie)\s*\]\]")
_PREFERRED_RE = re.compile(
    r"(?i)\b(?:assistant|response|story|option)\s+([ab])\b\s+(?:is\s+)?(?:the\s+)?"
    r"(?:better|best|preferred|stronger|wins)"
)
_TIE_RE = re.compile(r"(?i)\btie\b")


def _split_item(text: str) -> Criterion | None:
    """Split one list item into (title, description) at the first ':' or ' - '."""
    colon = text.find(":")
    dash = text.find(" - ")
    cut = -1
    width = 0
    if colon != -1 and (dash == -1 or colon < dash):
        cut, width = colon, 1
    elif dash != -1:
        cut, width = dash, 3
    if cut == -1:
        title, description = text, ""
    else:
        title, description = text[:cut], text[cut + width :]
    title = title.strip(_TITLE_STRIP)
    description = description.strip()
    if not title:
        return None
    return Criterion(title=title, description=description)


def parse_criteria(text: str, max_k: int) -> list[Criterion]:
    """Extract numbered or bulleted criteria, capped at max_k, in order.

    Continuation lines extend the current item's description; prose with
    no list structure at all raises ParseFailure.
    """
    items: list[str] = []
    for line in text.split("\n"):
        match = _ITEM_RE.match(line)
        if match:
            items.append(match.group(1).strip())
        elif items and line.strip():
            items[-1] = f"{items[-1]} {line.strip()}"

    criteria = [c for c in (_split_item(item) for item in items) if c is not None]
    if not criteria:
        raise ParseFailure("no criteria found in branch completion")
    return criteria[:max_k]


def parse_scores(text: str, bounds: tuple[int, int]) -> tuple[int, int]:
    """Recover a (first, second) score pair from a completion.

    Precedence: (1) labeled scores ('Assistant A: 4' / 'Assistant A ... 4/5'),
    taking the last occurrence per label; (2) n/hi fractions in order of
    appearance; (3) the last two standalone integers within bounds, with
    fraction denominators and 'out of N' markers masked out first.
    """
    lo, hi = bounds

    occurrences: list[tuple[int, str, int]] = []
    for regex in (_LABELED_RE, _LABELED_FRACTION_RE):
        for match in regex.finditer(text):
            occurrences.append((match.start(), match.group(1).lower(), int(match.group(2))))
    labeled: dict[str, int] = {}
    for _pos, label, value in sorted(occurrences):
        labeled[label] = value
    if "a" in labeled and "b" in labeled:
        return (labeled["a"], labeled["b"])

    numerators = [int(m.group(1)) for m in _FRACTION_RE.finditer(text) if int(m.group(2)) == hi]
    if len(numerators) >= 2:
        return (numerators[0], numerators[1])

    masked = _FRACTION_RE.sub(" ", text)
    masked = _OUT_OF_RE.sub(" ", masked)
    in_bounds = [int(m.group()) for m in _INT_RE.finditer(masked) if lo <= int(m.group()) <= hi]
    if len(in_bounds) >= 2:
        return (in_bounds[-2], in_bounds[-1])

    raise ScoreParseFailure(f"could not recover two scores from: {text[:120]!r}")


def _token_to_position(token: str) -> Position:
    token = token.lower()
    if token == "a":
        return Position.FIRST
    if token == "b":
        return Position.SECOND
    return Position.TIE  # "tie" or bracketed "c"


def parse_verdict(text: str) -> Position:
    """Map a verdict completion to a positional outcome.

    Precedence: explicit 'verdict: X' (last occurrence), a bracketed
    [[X]] token, the whole completion being a bare token, an
    'assistant X is better' phrase, then a standalone 'tie' anywhere.
    """
    matches = list(_VERDICT_RE.finditer(text))
    if matches:
        return _token_to_position(matches[-1].group(1))

    matches = list(_BRACKET_RE.finditer(text))
    if matches:
        return _token_to_position(matches[-1].group(1))

    bare = text.strip().strip(_TITLE_STRIP + ".!()").lower()
    if bare in ("a", "b", "tie"):
        return _token_to_position(bare)

    matches = list(_PREFERRED_RE.finditer(text))
    if matches:
        return _token_to_position(matches[-1].group(1))

    if _TIE_RE.search(text):
        return Position.TIE

    raise VerdictParseFailure(f"no verdict token in: {text[:120]!r}")
