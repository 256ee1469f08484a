"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class BsmError(Exception):
    """Base class for all engine errors."""


# --- backend / transport ---

class EmptyPrompt(BsmError):
    """A completion request was built with an empty prompt."""


class TransportError(BsmError):
    """Network-level failure talking to a remote backend, after retries."""


class BackendRefusal(BsmError):
    """Remote backend answered with a non-success status; body preserved."""

    def __init__(self, status_code: int, body: str):
        super().__init__(f"backend returned HTTP {status_code}: {body[:200]}")
        self.status_code = status_code
        self.body = body


class CacheCorrupt(BsmError):
    """A cache record failed its integrity check."""


# --- templating / program ---

class MissingPlaceholder(BsmError):
    def __init__(self, name: str):
        super().__init__(f"missing binding for placeholder '{name}'")
        self.name = name


class UnknownPlaceholder(BsmError):
    def __init__(self, name: str, detail: str = ""):
        msg = f"unknown placeholder '{name}'"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)
        self.name = name


class BranchEmpty(BsmError):
    """The branch module produced zero sub-problems."""


class SolveFailure(BsmError):
    """A solve call failed; carries the branch index it failed on."""

    def __init__(self, branch_index: int, cause: BaseException):
        super().__init__(f"solve failed on branch {branch_index}: {cause}")
        self.branch_index = branch_index


# --- completion parsing ---

class ParseFailure(BsmError):
    """No criteria could be extracted from a branch completion."""


class ScoreParseFailure(BsmError):
    """Fewer than two scores could be recovered from a completion."""


class ScoreOutOfRange(BsmError):
    """A parsed score lies outside the configured scale (never clamped)."""


class VerdictParseFailure(BsmError):
    """No verdict token could be recovered from a completion."""


class PlanParseFailure(BsmError):
    """A story branch completion lacked recognizable groups or a topic."""


# --- metrics ---

class EmptyDenominator(BsmError):
    """A metric's denominator would be zero."""


class EmptySubset(BsmError):
    """The self-enhancement filter matched no samples."""


class EmptyJudgments(BsmError):
    """Sum-merge was called with no judgments."""


class EmptyInput(BsmError):
    """A metric was called over an empty result set."""


# --- dataset ingestion ---

class SchemaError(BsmError):
    """A record file violates the expected schema."""

    def __init__(self, path: str, line_no: int | None, message: str):
        loc = f"{path}:{line_no}" if line_no is not None else path
        super().__init__(f"{loc}: {message}")
        self.path = path
        self.line_no = line_no


class JoinError(BsmError):
    """A record references an entity missing from the joined files."""
