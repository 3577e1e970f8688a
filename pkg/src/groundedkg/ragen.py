"""Prompt construction and answer generation against a pluggable LLM.

The wire protocol is OpenAI-compatible chat completions over HTTP with a
configurable base URL and model name, so any conforming provider works.
A deterministic in-process stub ships for offline runs and tests.
"""

from __future__ import annotations

import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import httpx

from .errors import ConfigError, LlmError

WITH_CONTENT = "with_content"
WITHOUT_CONTENT = "without_content"

_WITH_CONTENT_TEMPLATE = (
    "Please answer the question based on the following content:\n"
    "\n"
    "Content: {content}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Answer:"
)

_WITHOUT_CONTENT_TEMPLATE = (
    "Please answer the question based on your memory of the book {book_name}:\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Answer:"
)


@dataclass(frozen=True)
class PromptSpec:
    mode: str
    question: str
    content: str | None = None
    book_name: str | None = None

    @classmethod
    def with_content(cls, content: str, question: str) -> "PromptSpec":
        return cls(mode=WITH_CONTENT, question=question, content=content)

    @classmethod
    def without_content(cls, book_name: str, question: str) -> "PromptSpec":
        return cls(mode=WITHOUT_CONTENT, question=question, book_name=book_name)

    def validate(self) -> None:
        if not self.question or not self.question.strip():
            raise ConfigError("prompt question must be non-empty")
        if self.mode == WITH_CONTENT:
            if self.content is None:
                raise ConfigError("with_content prompt requires content")
        elif self.mode == WITHOUT_CONTENT:
            if not self.book_name:
                raise ConfigError("without_content prompt requires a book name")
        else:
            raise ConfigError(f"unknown prompt mode: {self.mode!r}")


def build_prompt(spec: PromptSpec) -> str:
    """Instantiate the prompt template byte-exactly. Pure function."""
    spec.validate()
    if spec.mode == WITH_CONTENT:
        return _WITH_CONTENT_TEMPLATE.format(content=spec.content, question=spec.question)
    return _WITHOUT_CONTENT_TEMPLATE.format(book_name=spec.book_name, question=spec.question)


@dataclass
class Completion:
    text: str
    usage: dict[str, int] = field(default_factory=dict)


class StubLlm:
    """Offline deterministic client: echoes the last non-empty prompt line.

    ``script`` may map a 0-based call index to an exception or a fixed
    reply, which tests use to drive failure paths.
    """

    def __init__(self, script: dict[int, object] | None = None):
        self.script = script or {}
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> Completion:
        with self._lock:
            call_index = self.calls
            self.calls += 1
        scripted = self.script.get(call_index)
        if isinstance(scripted, Exception):
            raise scripted
        lines = [line for line in prompt.splitlines() if line.strip()]
        text = scripted if isinstance(scripted, str) else (lines[-1] if lines else "")
        words = len(prompt.split())
        return Completion(text=text, usage={
            "prompt_tokens": words,
            "completion_tokens": len(text.split()),
            "total_tokens": words + len(text.split()),
        })


class LlmClient:
    """Chat-completions HTTP client with capped exponential-backoff retries.

    Safe to share across threads. Auth failures are not retried; transport
    errors, timeouts, 429 and 5xx responses are, up to ``max_retries``
    additional attempts.
    """

    def __init__(self, base_url: str, model: str, api_key: str | None = None,
                 api_key_env: str = "OPENAI_API_KEY", timeout: float = 60.0,
                 max_retries: int = 3, backoff_base: float = 0.5,
                 backoff_cap: float = 8.0, temperature: float | None = None):
        if not base_url.startswith(("http://", "https://")):
            raise ConfigError(f"LLM base URL must be an http(s) URL: {base_url!r}")
        if not model:
            raise ConfigError("LLM model name must be non-empty")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(api_key_env, "")
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self.temperature = temperature
        self._client = httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def _request_once(self, prompt: str) -> Completion:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body: dict = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        if self.temperature is not None:
            body["temperature"] = self.temperature
        response = self._client.post(
            f"{self.base_url}/chat/completions", json=body, headers=headers)
        if response.status_code in (401, 403):
            raise LlmError(f"authentication failed ({response.status_code})",
                           status=response.status_code)
        if response.status_code != 200:
            raise _RetryableStatus(response.status_code, response.text[:200])
        payload = response.json()
        try:
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise LlmError(f"malformed completion response: {payload}") from exc
        usage = payload.get("usage") or {}
        return Completion(text=text or "", usage={k: int(v) for k, v in usage.items()
                                                  if isinstance(v, (int, float))})

    def complete(self, prompt: str) -> Completion:
        attempt = 0
        while True:
            try:
                return self._request_once(prompt)
            except _RetryableStatus as exc:
                last = f"status {exc.status}: {exc.body}"
                status = exc.status
            except httpx.HTTPError as exc:
                last = f"transport error: {exc}"
                status = None
            if attempt >= self.max_retries:
                raise LlmError(f"completion failed after {attempt + 1} attempts; last: {last}",
                               status=status)
            time.sleep(min(self.backoff_cap, self.backoff_base * (2 ** attempt)))
            attempt += 1


class _RetryableStatus(Exception):
    def __init__(self, status: int, body: str):
        super().__init__(f"{status}: {body}")
        self.status = status
        self.body = body


@dataclass
class AnswerResult:
    answer: str | None
    usage: dict[str, int]
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def answer(spec: PromptSpec, llm) -> AnswerResult:
    """Build the prompt, call the client once, trim the completion."""
    prompt = build_prompt(spec)
    completion = llm.complete(prompt)
    return AnswerResult(answer=completion.text.strip(), usage=dict(completion.usage))


def answer_batch(specs: list[PromptSpec], llm, max_in_flight: int = 4) -> list[AnswerResult]:
    """Answer many prompts with at most ``max_in_flight`` concurrent requests.

    Results come back in input order; a failing item yields an error record
    without aborting the rest.
    """
    if max_in_flight <= 0:
        raise ConfigError("max_in_flight must be positive")
    if not specs:
        return []
    for spec in specs:
        spec.validate()

    def run_one(spec: PromptSpec) -> AnswerResult:
        try:
            return answer(spec, llm)
        except Exception as exc:  # per-item isolation is the contract
            return AnswerResult(answer=None, usage={}, error=f"{type(exc).__name__}: {exc}")

    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(run_one, specs))
