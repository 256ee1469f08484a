"""Text-completion backends: remote chat-completion services and a scripted mock."""

from bsm.backends.base import (
    GREEDY,
    Backend,
    CompletionRequest,
    CompletionResult,
    CountingBackend,
    Decoding,
)
from bsm.backends.cache import CachingBackend, CompletionCache, cached_complete
from bsm.backends.mock import MockBackend, MockRule, MockScript
from bsm.backends.remote import RemoteBackend

__all__ = [
    "Backend",
    "CachingBackend",
    "CompletionCache",
    "CompletionRequest",
    "CompletionResult",
    "CountingBackend",
    "Decoding",
    "GREEDY",
    "MockBackend",
    "MockRule",
    "MockScript",
    "RemoteBackend",
    "cached_complete",
]
