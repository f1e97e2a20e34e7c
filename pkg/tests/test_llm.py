import json

import httpx
import pytest

from layerlab.harness.tasks import TaskKind as T
from layerlab.llm import (
    AdaptiveLimiter,
    ChatMessage,
    ChatRequest,
    CredentialsError,
    HttpResponder,
    NoisyResponder,
    OracleResponder,
    RateLimitError,
    ReplayMissError,
    ReplayResponder,
    RetriesExhaustedError,
    RetryPolicy,
    TransportError,
    make_responder,
)

from . import paper_cases as pc


class FakeClock:
    def __init__(self):
        self.now = 0.0
        self.sleeps = []

    def __call__(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds


def _ok(content="42"):
    return httpx.Response(200, json={"choices": [{"message": {"content": content}, "finish_reason": "stop"}],
                                      "usage": {"total_tokens": 3}})


def _responder(monkeypatch, handler, **kw):
    monkeypatch.setenv("LAYERLAB_API_KEY", "k")
    clock = FakeClock()
    r = HttpResponder("http://llm.test", transport=httpx.MockTransport(handler), sleep=clock.sleep, clock=clock, **kw)
    return r, clock


REQ = ChatRequest.for_prompt("How many?", metadata={"secret": 1})


def test_request_validation():
    with pytest.raises(ValueError):
        ChatRequest((ChatMessage("user", "a"), ChatMessage("user", "b")))
    with pytest.raises(ValueError):
        ChatRequest.for_prompt("")
    with pytest.raises(ValueError):
        ChatRequest.for_prompt("x", temperature=-1)
    with pytest.raises(ValueError):
        ChatMessage("robot", "x")


def test_wire_body_is_a_single_clean_message_without_metadata(monkeypatch):
    seen = {}

    def handler(request):
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers["authorization"]
        return _ok()

    r, _ = _responder(monkeypatch, handler)
    resp = r.complete(REQ)
    assert resp.content == "42" and resp.attempts == 1 and resp.usage == {"total_tokens": 3}
    assert seen["body"]["messages"] == [{"role": "user", "content": "How many?"}]
    assert "metadata" not in seen["body"]
    assert seen["auth"] == "Bearer k"


def test_transient_errors_are_retried_with_backoff(monkeypatch):
    replies = iter([httpx.Response(503), httpx.Response(502), _ok("7")])
    r, clock = _responder(monkeypatch, lambda req: next(replies))
    resp = r.complete(REQ)
    assert resp.content == "7" and resp.attempts == 3
    assert clock.sleeps == [1.0, 2.0]


def test_rate_limit_honors_retry_after_and_reports_distinctly(monkeypatch):
    limiter = AdaptiveLimiter(4)
    r, clock = _responder(
        monkeypatch, lambda req: httpx.Response(429, headers={"retry-after": "5"}), limiter=limiter,
        retry=RetryPolicy(max_attempts=3),
    )
    with pytest.raises(RateLimitError) as info:
        r.complete(REQ)
    assert info.value.attempts == 3
    assert clock.sleeps == [5.0, 5.0]
    assert limiter.limit == 1


def test_total_backoff_is_capped(monkeypatch):
    r, clock = _responder(
        monkeypatch, lambda req: httpx.Response(500),
        retry=RetryPolicy(max_attempts=50, base_delay=1, max_delay=30, max_total_wait=60),
    )
    with pytest.raises(RetriesExhaustedError):
        r.complete(REQ)
    assert sum(clock.sleeps) <= 60


def test_network_errors_are_retried(monkeypatch):
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) == 1:
            raise httpx.ConnectTimeout("slow")
        return _ok()

    r, _ = _responder(monkeypatch, handler)
    assert r.complete(REQ).attempts == 2


def test_client_errors_fail_fast(monkeypatch):
    r, clock = _responder(monkeypatch, lambda req: httpx.Response(400, text="bad"))
    with pytest.raises(TransportError) as info:
        r.complete(REQ)
    assert not isinstance(info.value, (RateLimitError, RetriesExhaustedError))
    assert clock.sleeps == []


def test_unexpected_body(monkeypatch):
    r, _ = _responder(monkeypatch, lambda req: httpx.Response(200, json={"nope": 1}))
    with pytest.raises(TransportError):
        r.complete(REQ)


def test_missing_credentials(monkeypatch):
    monkeypatch.delenv("LAYERLAB_API_KEY", raising=False)
    with pytest.raises(CredentialsError):
        HttpResponder("http://llm.test")


def test_limiter_recovers_after_cooldown():
    clock = FakeClock()
    lim = AdaptiveLimiter(3, cooldown=10, clock=clock)
    lim.signal_rate_limited()
    lim.signal_rate_limited()
    assert lim.limit == 1
    clock.now = 11
    with lim:
        pass
    assert lim.limit == 2
    clock.now = 22
    with lim:
        pass
    assert lim.limit == 3
    with pytest.raises(ValueError):
        AdaptiveLimiter(0)


def _meta_request(task, payload, strategy="standard", spec_id="s1"):
    return ChatRequest.for_prompt(
        "prompt text " + spec_id,
        metadata={"spec_id": spec_id, "task": task.value, "strategy": strategy, "payload": payload},
    )


def test_oracle_and_noisy_responders():
    req = _meta_request(T.COUNT_CROSSINGS, pc.CC, "icl")
    assert OracleResponder().complete(req).content == "1"
    assert NoisyResponder(0.0, 1).complete(req).content == "1"
    assert NoisyResponder(1.0, 1).complete(req).content in ("0", "2")
    a = [NoisyResponder(0.5, 9).complete(_meta_request(T.EDGE_LENGTH, pc.EL, spec_id=str(i))).content for i in range(20)]
    b = [NoisyResponder(0.5, 9).complete(_meta_request(T.EDGE_LENGTH, pc.EL, spec_id=str(i))).content for i in range(20)]
    assert a == b and len(set(a)) > 1
    with pytest.raises(ValueError):
        NoisyResponder(1.5)
    with pytest.raises(ValueError):
        OracleResponder().complete(ChatRequest.for_prompt("x"))


def test_replay_responder(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text(json.dumps({"spec_id": "s1", "response": "hello"}) + "\n\n", encoding="utf-8")
    r = ReplayResponder.from_transcript(path)
    assert r.complete(_meta_request(T.EDGE_LENGTH, pc.EL)).content == "hello"
    with pytest.raises(ReplayMissError):
        r.complete(_meta_request(T.EDGE_LENGTH, pc.EL, spec_id="other"))


def test_make_responder():
    assert make_responder("oracle").name == "oracle"
    assert make_responder("noisy", noise_rate=0.1).error_rate == 0.1
    for kind, cfg in (("replay", {}), ("http", {}), ("carrier-pigeon", {})):
        with pytest.raises(ValueError):
            make_responder(kind, **cfg)
