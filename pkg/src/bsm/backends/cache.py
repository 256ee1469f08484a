"""Persistent completion cache: append-only record file, one record per call."""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path
from typing import Optional

from bsm.backends.base import Backend, CompletionRequest, CompletionResult
from bsm.errors import CacheCorrupt

_CACHE_FILENAME = "completions.jsonl"


def _text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class CompletionCache:
    """Keyed store of completions, loaded once and appended to thereafter.

    The key is a stable hash of (model_id, prompt, decoding, max_new_tokens);
    seeds are part of sampled decodings, so resampled calls get distinct
    entries. Writes are serialized through a lock; reads after load are
    plain dict lookups. Any record failing its integrity check raises
    CacheCorrupt -- corrupted caches are a signal, never silently refetched.
    """

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._path = self._dir / _CACHE_FILENAME
        self._lock = threading.Lock()
        self._records: dict[str, dict] = {}
        self.hits = 0
        self.misses = 0
        self._load()

    @property
    def path(self) -> Path:
        return self._path

    def __len__(self) -> int:
        return len(self._records)

    def _load(self) -> None:
        if not self._path.exists():
            return
        with open(self._path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CacheCorrupt(
                        f"{self._path}:{line_no}: undecodable record ({exc})"
                    ) from exc
                try:
                    key = record["key"]
                    text = record["text"]
                    digest = record["text_sha256"]
                except (KeyError, TypeError) as exc:
                    raise CacheCorrupt(
                        f"{self._path}:{line_no}: record missing required field"
                    ) from exc
                if _text_digest(text) != digest:
                    raise CacheCorrupt(
                        f"{self._path}:{line_no}: content hash mismatch for key {key}"
                    )
                self._records[key] = record

    def get(self, key: str) -> Optional[dict]:
        return self._records.get(key)

    def put(self, key: str, request: CompletionRequest, result: CompletionResult) -> None:
        record = {
            "key": key,
            "request": request.canonical_dict(),
            "text": result.text,
            "text_sha256": _text_digest(result.text),
            "backend_id": result.backend_id,
        }
        with self._lock:
            with open(self._path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
            self._records[key] = record


def cached_complete(
    cache: CompletionCache, backend: Backend, request: CompletionRequest
) -> CompletionResult:
    """Serve from cache when possible, otherwise call through and store."""
    key = request.cache_key()
    record = cache.get(key)
    if record is not None:
        cache.hits += 1
        return CompletionResult(
            text=record["text"],
            backend_id=record["backend_id"],
            cached=True,
            latency_ms=0,
        )
    cache.misses += 1
    result = backend.complete(request)
    cache.put(key, request, result)
    return result


class CachingBackend:
    """Backend wrapper routing every call through a CompletionCache."""

    def __init__(self, inner: Backend, cache: CompletionCache):
        self._inner = inner
        self.cache = cache
        self.backend_id = inner.backend_id

    def complete(self, request: CompletionRequest) -> CompletionResult:
        return cached_complete(self.cache, self._inner, request)
