"""Prompt templates with `{name}` placeholders and strict binding checks."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

from bsm.errors import MissingPlaceholder, UnknownPlaceholder

# `{{` / `}}` escape to literal braces; anything else brace-wrapped that
# looks like an identifier is a placeholder. Stray braces stay literal.
_TOKEN_RE = re.compile(r"\{\{|\}\}|\{[A-Za-z_][A-Za-z0-9_]*\}")


def find_placeholders(body: str) -> frozenset[str]:
    names = set()
    for token in _TOKEN_RE.findall(body):
        if token not in ("{{", "}}"):
            names.add(token[1:-1])
    return frozenset(names)


@dataclass(frozen=True)
class PromptTemplate:
    """A named prompt body plus the set of placeholders it must be given.

    The declared placeholder set must match the body exactly; a mismatch
    means a typo either in the body or in the declaration and is rejected
    at construction time.
    """

    name: str
    body: str
    required_placeholders: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        found = find_placeholders(self.body)
        declared = frozenset(self.required_placeholders)
        object.__setattr__(self, "required_placeholders", declared)
        for name in sorted(found - declared):
            raise UnknownPlaceholder(name, f"used in template '{self.name}' but not declared")
        for name in sorted(declared - found):
            raise UnknownPlaceholder(name, f"declared by template '{self.name}' but absent from body")

    @classmethod
    def from_body(cls, name: str, body: str) -> "PromptTemplate":
        return cls(name=name, body=body, required_placeholders=find_placeholders(body))


def render_prompt(template: PromptTemplate, bindings: Mapping[str, object]) -> str:
    """Substitute placeholders verbatim; all other text is untouched."""
    required = template.required_placeholders
    for name in sorted(required - bindings.keys()):
        raise MissingPlaceholder(name)
    for name in sorted(bindings.keys() - required):
        raise UnknownPlaceholder(name, f"not a placeholder of template '{template.name}'")

    def _sub(match: re.Match) -> str:
        token = match.group(0)
        if token == "{{":
            return "{"
        if token == "}}":
            return "}"
        return str(bindings[token[1:-1]])

    return _TOKEN_RE.sub(_sub, template.body)


def parse_template_text(text: str, default_name: str = "template") -> PromptTemplate:
    """Parse the on-disk template format: header lines, `---`, then the body.

    Header keys: `name` and `placeholders` (comma-separated).
    """
    lines = text.split("\n")
    try:
        sep = lines.index("---")
    except ValueError:
        raise ValueError("template file has no '---' separator line") from None

    name = default_name
    declared: frozenset[str] = frozenset()
    for raw in lines[:sep]:
        if not raw.strip():
            continue
        key, _, value = raw.partition(":")
        key = key.strip().lower()
        if key == "name":
            name = value.strip()
        elif key == "placeholders":
            declared = frozenset(p.strip() for p in value.split(",") if p.strip())
        else:
            raise ValueError(f"unknown template header key: {key!r}")

    body = "\n".join(lines[sep + 1 :])
    if body.endswith("\n"):
        body = body[:-1]
    return PromptTemplate(name=name, body=body, required_placeholders=declared)


def load_template(path: str | Path) -> PromptTemplate:
    path = Path(path)
    return parse_template_text(path.read_text(encoding="utf-8"), default_name=path.stem)


@lru_cache(maxsize=None)
def builtin_template(name: str) -> PromptTemplate:
    """Load one of the templates shipped under bsm/prompts/."""
    ref = resources.files("bsm").joinpath("prompts", f"{name}.prompt")
    return parse_template_text(ref.read_text(encoding="utf-8"), default_name=name)
