import threading

import pytest

from groundedkg.errors import ConfigError, LlmError
from groundedkg.ragen import (
    AnswerResult,
    LlmClient,
    PromptSpec,
    StubLlm,
    answer,
    answer_batch,
    build_prompt,
)

from .stub_servers import ChatServer


class TestPrompts:
    def test_with_content_exact_bytes(self):
        prompt = build_prompt(PromptSpec.with_content("X", "Q?"))
        assert prompt == ("Please answer the question based on the following "
                          "content:\n\nContent: X\n\nQuestion: Q?\n\nAnswer:")

    def test_without_content_exact_bytes(self):
        prompt = build_prompt(PromptSpec.without_content(
            "The Tale of Peter Rabbit", "Q?"))
        assert prompt == ("Please answer the question based on your memory of "
                          "the book The Tale of Peter Rabbit:\n\nQuestion: Q?"
                          "\n\nAnswer:")

    def test_pure_function(self):
        spec = PromptSpec.with_content("same content", "same question?")
        assert build_prompt(spec) == build_prompt(spec)

    def test_empty_question_rejected(self):
        with pytest.raises(ConfigError):
            build_prompt(PromptSpec.with_content("X", "  "))

    def test_mode_invariants(self):
        with pytest.raises(ConfigError):
            PromptSpec(mode="with_content", question="Q?").validate()
        with pytest.raises(ConfigError):
            PromptSpec(mode="without_content", question="Q?").validate()
        with pytest.raises(ConfigError):
            PromptSpec(mode="surprise", question="Q?").validate()


class TestStubClient:
    def test_echoes_last_line(self):
        result = answer(PromptSpec.with_content("ctx", "Q?"), StubLlm())
        assert result.answer == "Answer:"
        assert result.usage["prompt_tokens"] > 0

    def test_scripted_reply_and_failure(self):
        stub = StubLlm(script={0: "fixed reply", 1: LlmError("boom")})
        assert stub.complete("x").text == "fixed reply"
        with pytest.raises(LlmError):
            stub.complete("x")


class TestHttpClient:
    def test_completion_round_trip(self):
        with ChatServer() as server:
            client = LlmClient(base_url=server.base_url, model="test-model",
                               api_key="k")
            result = answer(PromptSpec.with_content("some context", "Q?"), client)
            assert result.answer == "echo: Answer:"
            assert result.usage["total_tokens"] > 0
            client.close()

    def test_malformed_base_url_fails_before_any_request(self):
        with pytest.raises(ConfigError):
            LlmClient(base_url="ftp://nope", model="m")

    def test_auth_error_not_retried(self):
        with ChatServer(require_auth="secret") as server:
            client = LlmClient(base_url=server.base_url, model="m",
                               api_key="wrong", max_retries=5)
            with pytest.raises(LlmError) as excinfo:
                client.complete("hi")
            assert excinfo.value.status == 401
            assert server.stats.requests == 1
            client.close()

    def test_transient_failures_retried(self):
        with ChatServer(fail_indices={0: 500, 1: 429}) as server:
            client = LlmClient(base_url=server.base_url, model="m",
                               max_retries=3, backoff_base=0.01)
            result = client.complete("line one\nline two")
            assert result.text == "echo: line two"
            assert server.stats.requests == 3
            client.close()

    def test_retries_exhausted(self):
        with ChatServer(fail_indices={i: 500 for i in range(10)}) as server:
            client = LlmClient(base_url=server.base_url, model="m",
                               max_retries=2, backoff_base=0.01)
            with pytest.raises(LlmError, match="after 3 attempts"):
                client.complete("hi")
            client.close()


class TestBatch:
    def test_empty_batch(self):
        assert answer_batch([], StubLlm()) == []

    def test_sequential_order_preserved(self):
        specs = [PromptSpec.with_content(f"c{i}", f"q{i}?") for i in range(3)]
        results = answer_batch(specs, StubLlm(), max_in_flight=1)
        assert [r.answer for r in results] == ["Answer:"] * 3
        assert all(r.ok for r in results)

    def test_partial_failure_isolated(self):
        with ChatServer(fail_indices={5: 500}) as server:
            client = LlmClient(base_url=server.base_url, model="m",
                               max_retries=0, backoff_base=0.01)
            specs = [PromptSpec.with_content(f"c{i}", f"q{i}?") for i in range(10)]
            results = answer_batch(specs, client, max_in_flight=1)
            assert len(results) == 10
            failures = [i for i, r in enumerate(results) if not r.ok]
            assert failures == [5]
            assert all(r.answer == "echo: Answer:" for i, r in enumerate(results)
                       if i != 5)
            client.close()

    def test_concurrency_bounded(self):
        with ChatServer(latency=0.02) as server:
            client = LlmClient(base_url=server.base_url, model="m")
            specs = [PromptSpec.with_content(f"c{i}", f"q{i}?") for i in range(12)]
            results = answer_batch(specs, client, max_in_flight=3)
            assert all(r.ok for r in results)
            assert server.stats.max_in_flight <= 3
            assert server.stats.requests == 12
            client.close()

    def test_thirty_question_batch(self):
        with ChatServer() as server:
            client = LlmClient(base_url=server.base_url, model="m")
            specs = [PromptSpec.with_content(f"content {i}", f"question {i}?")
                     for i in range(30)]
            results = answer_batch(specs, client, max_in_flight=4)
            assert len(results) == 30
            assert all(isinstance(r, AnswerResult) and r.ok for r in results)
            client.close()

    def test_bad_max_in_flight(self):
        with pytest.raises(ConfigError):
            answer_batch([PromptSpec.with_content("c", "q?")], StubLlm(),
                         max_in_flight=0)
