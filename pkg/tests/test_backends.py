"""Backend layer: mock scripting, remote retries, and the completion cache."""

import threading

import httpx
import pytest

from bsm.backends.base import CompletionRequest, CountingBackend, Decoding
from bsm.backends.cache import CachingBackend, CompletionCache, cached_complete
from bsm.backends.mock import MockBackend, MockRule, MockScript
from bsm.backends.remote import RemoteBackend
from bsm.errors import BackendRefusal, CacheCorrupt, EmptyPrompt, TransportError


def _req(prompt="hello there", **kwargs):
    return CompletionRequest(prompt=prompt, **kwargs)


class TestDecoding:
    def test_greedy_carries_no_sampling_params(self):
        with pytest.raises(ValueError):
            Decoding(mode="greedy", temperature=0.7)
        with pytest.raises(ValueError):
            Decoding(mode="greedy", seed=3)

    def test_sample_requires_temperature_and_seed(self):
        with pytest.raises(ValueError):
            Decoding(mode="sample", temperature=0.7)
        with pytest.raises(ValueError):
            Decoding(mode="sample", seed=1)
        with pytest.raises(ValueError):
            Decoding.sample(2.5, 1)
        assert Decoding.sample(0.7, 1).temperature == 0.7

    def test_round_trip(self):
        d = Decoding.sample(0.7, 42)
        assert Decoding.from_dict(d.to_dict()) == d
        assert Decoding.from_dict({"mode": "greedy"}) == Decoding.greedy()


class TestMockBackend:
    def test_first_match_wins(self):
        backend = MockBackend(MockScript.from_rules([("Evaluate", "Response A: 4/5")]))
        result = backend.complete(_req("Evaluate these responses please"))
        assert result.text == "Response A: 4/5"
        assert result.backend_id == "mock"

    def test_default_fallback(self):
        backend = MockBackend(MockScript.from_rules([("Evaluate", "x")], default="tie"))
        assert backend.complete(_req("something else")).text == "tie"

    def test_rule_order_matters(self):
        script = MockScript.from_rules([("eval", "first"), ("evaluate", "second")])
        assert MockBackend(script).complete(_req("evaluate")).text == "first"

    def test_regex_rule(self):
        script = MockScript(rules=(MockRule(r"(?s)alpha.*beta", "ordered", regex=True),))
        assert MockBackend(script).complete(_req("alpha then beta")).text == "ordered"
        assert MockBackend(script).complete(_req("beta then alpha")).text == ""

    def test_empty_prompt_rejected(self):
        with pytest.raises(EmptyPrompt):
            _req("")

    def test_deterministic_under_threads(self):
        script = MockScript.from_rules(
            [(f"prompt-{i:02d}", f"answer-{i}") for i in range(20)], default="none"
        )
        backend = MockBackend(script)
        results: dict[int, set] = {i: set() for i in range(20)}
        lock = threading.Lock()

        def worker(offset):
            for i in range(20):
                idx = (i + offset) % 20
                text = backend.complete(_req(f"ask prompt-{idx:02d} now")).text
                with lock:
                    results[idx].add(text)

        threads = [threading.Thread(target=worker, args=(k,)) for k in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for i in range(20):
            assert results[i] == {f"answer-{i}"}

    def test_script_file_round_trip(self, tmp_path):
        path = tmp_path / "script.json"
        path.write_text(
            '{"rules": [{"match": "a.b", "regex": true, "response": "r"}], "default": "d"}'
        )
        script = MockScript.from_file(path)
        assert script.respond("axb") == "r"
        assert script.respond("nothing") == "d"


def _remote(handler, **kwargs):
    client = httpx.Client(transport=httpx.MockTransport(handler))
    kwargs.setdefault("sleeper", lambda _s: None)
    return RemoteBackend("http://llm.test", api_key="k", client=client, **kwargs)


def _chat_response(text):
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


class TestRemoteBackend:
    def test_happy_path_payload(self):
        seen = {}

        def handler(request):
            seen["json"] = request.read()
            seen["url"] = str(request.url)
            seen["auth"] = request.headers.get("authorization")
            return _chat_response("fine answer")

        backend = _remote(handler)
        result = backend.complete(_req(decoding=Decoding.sample(0.7, 5), max_new_tokens=64))
        assert result.text == "fine answer"
        assert not result.cached
        assert seen["url"].endswith("/v1/chat/completions")
        assert seen["auth"] == "Bearer k"
        import json

        payload = json.loads(seen["json"])
        assert payload["messages"] == [{"role": "user", "content": "hello there"}]
        assert payload["temperature"] == 0.7
        assert payload["seed"] == 5
        assert payload["max_tokens"] == 64

    def test_greedy_sends_temperature_zero(self):
        seen = {}

        def handler(request):
            import json

            seen["payload"] = json.loads(request.read())
            return _chat_response("ok")

        _remote(handler).complete(_req())
        assert seen["payload"]["temperature"] == 0.0
        assert "seed" not in seen["payload"]

    def test_unreachable_after_three_attempts(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            raise httpx.ConnectError("no route")

        with pytest.raises(TransportError):
            _remote(handler).complete(_req())
        assert len(attempts) == 3

    def test_refusal_preserves_body(self):
        def handler(request):
            return httpx.Response(400, text="bad request body blob")

        with pytest.raises(BackendRefusal) as info:
            _remote(handler).complete(_req())
        assert info.value.status_code == 400
        assert "bad request body blob" in info.value.body

    def test_retryable_status_then_success(self):
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) < 3:
                return httpx.Response(503, text="busy")
            return _chat_response("recovered")

        assert _remote(handler).complete(_req()).text == "recovered"
        assert len(calls) == 3

    def test_retryable_status_exhausted_surfaces_refusal(self):
        def handler(request):
            return httpx.Response(503, text="still busy")

        with pytest.raises(BackendRefusal) as info:
            _remote(handler).complete(_req())
        assert info.value.status_code == 503

    def test_malformed_body_is_transport_error(self):
        def handler(request):
            return httpx.Response(200, json={"nope": []})

        with pytest.raises(TransportError):
            _remote(handler).complete(_req())


class TestCache:
    def test_idempotent_round_trip(self, tmp_path):
        cache = CompletionCache(tmp_path)
        backend = MockBackend(MockScript.from_rules([("q", "stable answer")]))
        first = cached_complete(cache, backend, _req("q1"))
        second = cached_complete(cache, backend, _req("q1"))
        assert first.text == second.text == "stable answer"
        assert not first.cached
        assert second.cached
        assert cache.hits == 1 and cache.misses == 1

    def test_decoding_distinguishes_entries(self, tmp_path):
        cache = CompletionCache(tmp_path)
        backend = MockBackend(MockScript(default_response="x"))
        cached_complete(cache, backend, _req("same prompt"))
        cached_complete(cache, backend, _req("same prompt", decoding=Decoding.sample(0.7, 1)))
        cached_complete(cache, backend, _req("same prompt", decoding=Decoding.sample(0.7, 2)))
        assert len(cache) == 3

    def test_near_identical_prompts_get_distinct_keys(self):
        # fixture corpus: single-character perturbations of one base prompt
        base = "Compare response quality across criteria "
        corpus = [base + c for c in "abcdefghijklmnopqrstuvwxyz0123456789"]
        corpus += [base.rstrip() , base.upper(), base + " ", base + "  "]
        keys = {_req(p).cache_key() for p in corpus}
        assert len(keys) == len(corpus)

    def test_request_serializes_identically_wire_and_cache(self, tmp_path):
        cache = CompletionCache(tmp_path)
        backend = MockBackend(MockScript(default_response="y"))
        request = _req("please answer", decoding=Decoding.sample(1.0, 9), max_new_tokens=7)
        cached_complete(cache, backend, request)
        record = cache.get(request.cache_key())
        assert record["request"] == request.canonical_dict()
        assert CompletionRequest(
            prompt=record["request"]["prompt"],
            decoding=Decoding.from_dict(record["request"]["decoding"]),
            max_new_tokens=record["request"]["max_new_tokens"],
            model_id=record["request"]["model_id"],
        ).canonical_json() == request.canonical_json()

    def test_persistence_across_reopen(self, tmp_path):
        backend = MockBackend(MockScript(default_response="persisted"))
        cache = CompletionCache(tmp_path)
        cached_complete(cache, backend, _req("q"))
        reopened = CompletionCache(tmp_path)
        result = cached_complete(reopened, backend, _req("q"))
        assert result.cached and result.text == "persisted"

    def test_tampered_record_raises(self, tmp_path):
        cache = CompletionCache(tmp_path)
        cached_complete(cache, MockBackend(MockScript(default_response="v")), _req("q"))
        raw = cache.path.read_text().replace('"v"', '"tampered"')
        cache.path.write_text(raw)
        with pytest.raises(CacheCorrupt):
            CompletionCache(tmp_path)

    def test_truncated_line_raises(self, tmp_path):
        cache = CompletionCache(tmp_path)
        cached_complete(cache, MockBackend(MockScript(default_response="v")), _req("q"))
        with open(cache.path, "a") as fh:
            fh.write('{"key": "zz", "text": "unfin')
        with pytest.raises(CacheCorrupt):
            CompletionCache(tmp_path)

    def test_caching_backend_wrapper(self, tmp_path):
        cache = CompletionCache(tmp_path)
        wrapped = CachingBackend(MockBackend(MockScript(default_response="w")), cache)
        counting = CountingBackend(wrapped)
        counting.complete(_req("a"))
        counting.complete(_req("a"))
        assert counting.total == 2
        assert cache.hits == 1
