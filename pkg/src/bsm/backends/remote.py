"""Chat-completion HTTP client with bounded retries."""

from __future__ import annotations

import os
import random
import time
from typing import Callable, Optional

import httpx

from bsm.backends.base import Backend, CompletionRequest, CompletionResult
from bsm.errors import BackendRefusal, TransportError

API_KEY_ENV = "BSM_API_KEY"

# statuses worth retrying before surfacing a refusal
_RETRYABLE_STATUSES = {429, 500, 502, 503, 504}


class RemoteBackend(Backend):
    """Talks to any chat-completion-style endpoint.

    The wire exchange is one user message carrying the rendered prompt;
    greedy decoding is sent as temperature 0. Transient failures are
    retried with exponential backoff plus jitter (default 3 attempts).
    """

    def __init__(
        self,
        endpoint_url: str,
        api_key: Optional[str] = None,
        api_key_env: str = API_KEY_ENV,
        timeout_s: float = 60.0,
        max_attempts: int = 3,
        backoff_base_s: float = 0.5,
        backoff_cap_s: float = 8.0,
        client: Optional[httpx.Client] = None,
        sleeper: Callable[[float], None] = time.sleep,
        rng: Optional[random.Random] = None,
    ):
        self._url = endpoint_url.rstrip("/") + "/v1/chat/completions"
        self._api_key = api_key if api_key is not None else os.environ.get(api_key_env)
        self._client = client or httpx.Client(timeout=timeout_s)
        self._max_attempts = max(1, max_attempts)
        self._backoff_base_s = backoff_base_s
        self._backoff_cap_s = backoff_cap_s
        self._sleep = sleeper
        self._rng = rng or random.Random()
        self.backend_id = f"remote:{endpoint_url}"

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        return headers

    def _payload(self, request: CompletionRequest) -> dict:
        payload = {
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_new_tokens,
        }
        if request.decoding.mode == "greedy":
            payload["temperature"] = 0.0
        else:
            payload["temperature"] = request.decoding.temperature
            payload["seed"] = request.decoding.seed
        return payload

    def _backoff(self, attempt: int) -> None:
        delay = min(self._backoff_base_s * (2 ** attempt), self._backoff_cap_s)
        self._sleep(delay + self._rng.uniform(0, delay / 2))

    def complete(self, request: CompletionRequest) -> CompletionResult:
        payload = self._payload(request)
        last_error: Optional[BaseException] = None
        last_refusal: Optional[BackendRefusal] = None

        for attempt in range(self._max_attempts):
            started = time.monotonic()
            try:
                response = self._client.post(self._url, json=payload, headers=self._headers())
            except httpx.HTTPError as exc:
                last_error = exc
                if attempt + 1 < self._max_attempts:
                    self._backoff(attempt)
                continue

            if response.status_code // 100 == 2:
                text = self._extract_text(response)
                latency_ms = int((time.monotonic() - started) * 1000)
                return CompletionResult(
                    text=text,
                    backend_id=self.backend_id,
                    cached=False,
                    latency_ms=latency_ms,
                )

            refusal = BackendRefusal(response.status_code, response.text)
            if response.status_code in _RETRYABLE_STATUSES and attempt + 1 < self._max_attempts:
                last_refusal = refusal
                self._backoff(attempt)
                continue
            raise refusal

        if last_refusal is not None:
            raise last_refusal
        raise TransportError(
            f"request failed after {self._max_attempts} attempts: {last_error}"
        ) from last_error

    def _extract_text(self, response: httpx.Response) -> str:
        try:
            data = response.json()
            return data["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion response: {exc}") from exc
