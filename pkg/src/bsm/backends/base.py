"""Request/result types and the backend protocol."""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from typing import Optional, Protocol, runtime_checkable

from bsm.errors import EmptyPrompt


@dataclass(frozen=True)
class Decoding:
    """Decoding parameters for one completion.

    Greedy decoding carries no temperature or seed; sampled decoding
    requires both (the seed keeps sampled calls cache-addressable).
    """

    mode: str  # "greedy" | "sample"
    temperature: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.mode == "greedy":
            if self.temperature is not None or self.seed is not None:
                raise ValueError("greedy decoding carries no temperature or seed")
        elif self.mode == "sample":
            if self.temperature is None or not (0.0 < self.temperature <= 2.0):
                raise ValueError("sample decoding needs temperature in (0, 2]")
            if self.seed is None:
                raise ValueError("sample decoding needs a seed")
        else:
            raise ValueError(f"unknown decoding mode: {self.mode!r}")

    @classmethod
    def greedy(cls) -> "Decoding":
        return cls(mode="greedy")

    @classmethod
    def sample(cls, temperature: float, seed: int) -> "Decoding":
        return cls(mode="sample", temperature=temperature, seed=seed)

    def to_dict(self) -> dict:
        if self.mode == "greedy":
            return {"mode": "greedy"}
        return {"mode": "sample", "temperature": self.temperature, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "Decoding":
        if d.get("mode") == "sample":
            return cls.sample(d["temperature"], d["seed"])
        return cls.greedy()


GREEDY = Decoding.greedy()


@dataclass(frozen=True)
class CompletionRequest:
    """One prompt sent to a backend, with its decoding parameters."""

    prompt: str
    decoding: Decoding = GREEDY
    max_new_tokens: int = 512
    model_id: str = "default"

    def __post_init__(self) -> None:
        if not self.prompt:
            raise EmptyPrompt("completion request has an empty prompt")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be positive")

    def canonical_dict(self) -> dict:
        """Stable dict form; identical for the wire and for the cache."""
        return {
            "model_id": self.model_id,
            "prompt": self.prompt,
            "decoding": self.decoding.to_dict(),
            "max_new_tokens": self.max_new_tokens,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.canonical_dict(), sort_keys=True, ensure_ascii=False)

    def cache_key(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionResult:
    """Backend answer for one request.

    text may be empty only when the backend genuinely returned an empty
    completion -- recorded as-is, never erased.
    """

    text: str
    backend_id: str
    cached: bool = False
    latency_ms: int = 0

    def __post_init__(self) -> None:
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be non-negative")


@runtime_checkable
class Backend(Protocol):
    """Anything that can answer a CompletionRequest."""

    backend_id: str

    def complete(self, request: CompletionRequest) -> CompletionResult:
        ...


class CountingBackend:
    """Wrapper that counts every request passing through it (thread-safe)."""

    def __init__(self, inner: Backend):
        self._inner = inner
        self._lock = threading.Lock()
        self.total = 0
        self.backend_id = inner.backend_id

    def complete(self, request: CompletionRequest) -> CompletionResult:
        with self._lock:
            self.total += 1
        return self._inner.complete(request)
