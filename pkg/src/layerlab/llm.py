"""Chat-completion access: an HTTP backend and offline mock responders.

Mock responders answer from the deterministic engine, so the whole
harness runs without network access. They read the task instance from
the request's ``metadata``, which never goes over the wire.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol

import httpx

from .harness.prompts import format_answer
from .harness.tasks import Strategy, TaskKind, oracle_value, perturb_value

DEFAULT_API_KEY_ENV = "LAYERLAB_API_KEY"
DEFAULT_PATH = "/v1/chat/completions"


class TransportError(RuntimeError):
    """The backend could not produce a response."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class RateLimitError(TransportError):
    """The backend kept answering 429 until the retry budget ran out."""


class RetriesExhaustedError(TransportError):
    pass


class CredentialsError(TransportError):
    pass


class ReplayMissError(KeyError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    """One clean-thread exchange: a single user message, no history."""

    messages: tuple[ChatMessage, ...]
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_tokens: int = 1024
    metadata: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        users = [m for m in self.messages if m.role == "user"]
        if len(users) != 1:
            raise ValueError("a harness request carries exactly one user message")
        if not users[0].content:
            raise ValueError("empty prompt")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @classmethod
    def for_prompt(cls, text: str, metadata: dict | None = None, **options: Any) -> ChatRequest:
        return cls((ChatMessage("user", text),), metadata=metadata or {}, **options)

    @property
    def prompt(self) -> str:
        return next(m.content for m in self.messages if m.role == "user")

    def wire_body(self) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


@dataclass(frozen=True)
class ChatResponse:
    content: str
    finish_reason: str = "stop"
    usage: dict = field(default_factory=dict)
    latency: float = 0.0
    attempts: int = 1


class Responder(Protocol):
    name: str

    def complete(self, req: ChatRequest) -> ChatResponse: ...


# -- concurrency ------------------------------------------------------------------


class AdaptiveLimiter:
    """Caps in-flight requests; rate limiting lowers the cap for a while.

    Each rate-limit signal removes one slot (never below one). After
    ``cooldown`` seconds without a signal the cap grows back by one slot
    per acquisition until it reaches ``max_inflight`` again.
    """

    def __init__(self, max_inflight: int, cooldown: float = 30.0, clock: Callable[[], float] = time.monotonic):
        if max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")
        self.max_inflight = max_inflight
        self.limit = max_inflight
        self.cooldown = cooldown
        self._clock = clock
        self._inflight = 0
        self._last_signal: float | None = None
        self._cond = threading.Condition()

    def acquire(self) -> None:
        with self._cond:
            self._maybe_recover()
            while self._inflight >= self.limit:
                self._cond.wait(timeout=0.05)
                self._maybe_recover()
            self._inflight += 1

    def release(self) -> None:
        with self._cond:
            self._inflight -= 1
            self._cond.notify_all()

    def __enter__(self) -> AdaptiveLimiter:
        self.acquire()
        return self

    def __exit__(self, *exc: object) -> None:
        self.release()

    def signal_rate_limited(self) -> None:
        with self._cond:
            self.limit = max(1, self.limit - 1)
            self._last_signal = self._clock()

    def _maybe_recover(self) -> None:
        if self.limit < self.max_inflight and self._last_signal is not None:
            if self._clock() - self._last_signal >= self.cooldown:
                self.limit += 1
                self._last_signal = self._clock() if self.limit < self.max_inflight else None


# -- HTTP -------------------------------------------------------------------------


@dataclass
class RetryPolicy:
    max_attempts: int = 5
    base_delay: float = 1.0
    max_delay: float = 30.0
    max_total_wait: float = 120.0  # wall-clock ceiling on time spent backing off

    def delay(self, attempt: int, retry_after: float | None = None) -> float:
        d = min(self.base_delay * (2 ** attempt), self.max_delay)
        if retry_after is not None:
            d = max(d, retry_after)
        return d


_TRANSIENT_STATUS = {500, 502, 503, 504}


class HttpResponder:
    """POSTs to an OpenAI-style chat-completions endpoint."""

    name = "http"

    def __init__(
        self,
        endpoint: str,
        path: str = DEFAULT_PATH,
        api_key_env: str = DEFAULT_API_KEY_ENV,
        retry: RetryPolicy | None = None,
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
        limiter: AdaptiveLimiter | None = None,
    ):
        self.api_key = os.environ.get(api_key_env)
        if not self.api_key:
            raise CredentialsError(f"environment variable {api_key_env} is not set")
        self.retry = retry or RetryPolicy()
        self.path = path
        self._sleep = sleep
        self._clock = clock
        self.limiter = limiter
        self._client = httpx.Client(
            base_url=endpoint,
            timeout=timeout,
            transport=transport,
            headers={"Authorization": f"Bearer {self.api_key}"},
        )

    def close(self) -> None:
        self._client.close()

    def complete(self, req: ChatRequest) -> ChatResponse:
        start = self._clock()
        waited = 0.0
        last_error = "no attempt made"
        rate_limited = False
        for attempt in range(self.retry.max_attempts):
            retry_after = None
            try:
                resp = self._client.post(self.path, json=req.wire_body())
            except (httpx.TimeoutException, httpx.NetworkError) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                rate_limited = False
            else:
                if resp.status_code == 200:
                    return self._decode(resp, self._clock() - start, attempt + 1)
                if resp.status_code == 429:
                    rate_limited = True
                    last_error = "HTTP 429"
                    retry_after = _retry_after(resp)
                    if self.limiter is not None:
                        self.limiter.signal_rate_limited()
                elif resp.status_code in _TRANSIENT_STATUS:
                    rate_limited = False
                    last_error = f"HTTP {resp.status_code}"
                else:
                    raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}", attempt + 1)
            if attempt + 1 == self.retry.max_attempts:
                break
            pause = self.retry.delay(attempt, retry_after)
            if waited + pause > self.retry.max_total_wait:
                break
            self._sleep(pause)
            waited += pause
        cls = RateLimitError if rate_limited else RetriesExhaustedError
        raise cls(f"gave up after {attempt + 1} attempts: {last_error}", attempt + 1)

    @staticmethod
    def _decode(resp: httpx.Response, latency: float, attempts: int) -> ChatResponse:
        try:
            data = resp.json()
            choice = data["choices"][0]
            content = choice["message"].get("content") or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response body: {exc}", attempts) from exc
        return ChatResponse(
            content=content,
            finish_reason=choice.get("finish_reason") or "stop",
            usage=data.get("usage") or {},
            latency=latency,
            attempts=attempts,
        )


def _retry_after(resp: httpx.Response) -> float | None:
    raw = resp.headers.get("retry-after")
    try:
        return float(raw) if raw is not None else None
    except ValueError:
        return None


# -- mocks ------------------------------------------------------------------------


def _instance(req: ChatRequest) -> tuple[TaskKind, Strategy, dict]:
    meta = req.metadata
    if not {"task", "payload"} <= meta.keys():
        raise ValueError("mock responders need task and payload metadata on the request")
    return TaskKind(meta["task"]), Strategy.parse(meta.get("strategy", "standard")), meta["payload"]


class OracleResponder:
    """Answers with the engine's result in the task's answer format."""

    name = "oracle"

    def complete(self, req: ChatRequest) -> ChatResponse:
        task, strategy, payload = _instance(req)
        return ChatResponse(format_answer(task, strategy, payload))


class NoisyResponder:
    """Oracle answers with one seeded mistake at rate ``error_rate``.

    The decision and the mistake depend only on the prompt text and the
    seed, so reruns reproduce the same answers in any dispatch order.
    """

    name = "noisy"

    def __init__(self, error_rate: float, seed: int = 0):
        if not 0.0 <= error_rate <= 1.0:
            raise ValueError("error_rate must lie in [0, 1]")
        self.error_rate = error_rate
        self.seed = seed

    def _rng(self, req: ChatRequest) -> random.Random:
        digest = hashlib.sha256(f"{self.seed}\0{req.prompt}".encode()).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))

    def complete(self, req: ChatRequest) -> ChatResponse:
        task, strategy, payload = _instance(req)
        value = oracle_value(task, payload)
        rng = self._rng(req)
        if rng.random() < self.error_rate:
            value = perturb_value(task, value, rng)
        return ChatResponse(format_answer(task, strategy, payload, value))


class ReplayResponder:
    """Serves responses recorded in a transcript, keyed by spec id."""

    name = "replay"

    def __init__(self, responses: dict[str, str]):
        self.responses = dict(responses)

    @classmethod
    def from_transcript(cls, path: str | Path) -> ReplayResponder:
        responses = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    responses[rec["spec_id"]] = rec["response"]
        return cls(responses)

    def complete(self, req: ChatRequest) -> ChatResponse:
        key = req.metadata.get("spec_id")
        if key not in self.responses:
            raise ReplayMissError(f"no recorded response for spec {key!r}")
        return ChatResponse(self.responses[key])


def complete(req: ChatRequest, responder: Responder) -> ChatResponse:
    return responder.complete(req)


def make_responder(kind: str, **config: Any) -> Responder:
    """Build a responder from CLI-style settings."""
    if kind == "oracle":
        return OracleResponder()
    if kind == "noisy":
        return NoisyResponder(config.get("noise_rate", 0.3), config.get("seed", 0))
    if kind == "replay":
        if not config.get("transcript"):
            raise ValueError("replay needs a transcript path")
        return ReplayResponder.from_transcript(config["transcript"])
    if kind == "http":
        if not config.get("endpoint"):
            raise ValueError("http needs an endpoint")
        return HttpResponder(config["endpoint"], limiter=config.get("limiter"))
    raise ValueError(f"unknown responder {kind!r}")
