"""In-process HTTP stubs for the embed and chat-completion protocols.

Both servers are deterministic and instrumented: they count in-flight
requests so tests can assert concurrency bounds, and they can be scripted
to fail specific request indices.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np


class _Instrumented:
    def __init__(self):
        self.lock = threading.Lock()
        self.in_flight = 0
        self.max_in_flight = 0
        self.requests = 0

    def enter(self) -> int:
        with self.lock:
            index = self.requests
            self.requests += 1
            self.in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)
            return index

    def leave(self) -> None:
        with self.lock:
            self.in_flight -= 1


def stub_vector(text: str, dim: int, seed: int = 0) -> list[float]:
    digest = hashlib.sha256(f"{seed}\x00{text}".encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    vec = rng.standard_normal(dim)
    vec /= np.linalg.norm(vec)
    return [float(x) for x in vec]


class EmbedServer:
    """Serves POST /embed with hash-seeded unit vectors."""

    def __init__(self, dim: int = 8, seed: int = 7):
        self.dim = dim
        self.seed = seed
        self.stats = _Instrumented()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                outer.stats.enter()
                try:
                    length = int(self.headers.get("Content-Length", 0))
                    payload = json.loads(self.rfile.read(length))
                    texts = payload.get("texts", [])
                    vectors = [stub_vector(t, outer.dim, outer.seed) for t in texts]
                    body = json.dumps({"dim": outer.dim, "vectors": vectors}).encode()
                    self.send_response(200)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                finally:
                    outer.stats.leave()

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def endpoint(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/embed"

    def __enter__(self) -> "EmbedServer":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()


class ChatServer:
    """OpenAI-style chat-completions stub.

    ``fail_indices`` maps request index -> HTTP status to return instead of
    a completion. ``latency`` adds a small sleep so concurrency overlaps
    become observable. The completion text echoes the last non-empty line
    of the user message.
    """

    def __init__(self, fail_indices: dict[int, int] | None = None,
                 latency: float = 0.0, require_auth: str | None = None):
        self.fail_indices = fail_indices or {}
        self.latency = latency
        self.require_auth = require_auth
        self.stats = _Instrumented()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                index = outer.stats.enter()
                try:
                    if outer.latency:
                        time.sleep(outer.latency)
                    length = int(self.headers.get("Content-Length", 0))
                    payload = json.loads(self.rfile.read(length))
                    if outer.require_auth is not None:
                        auth = self.headers.get("Authorization", "")
                        if auth != f"Bearer {outer.require_auth}":
                            self._reply(401, {"error": "unauthorized"})
                            return
                    status = outer.fail_indices.get(index)
                    if status is not None:
                        self._reply(status, {"error": f"scripted failure {status}"})
                        return
                    prompt = payload["messages"][-1]["content"]
                    lines = [l for l in prompt.splitlines() if l.strip()]
                    text = f"echo: {lines[-1] if lines else ''}"
                    self._reply(200, {
                        "choices": [{"message": {"role": "assistant", "content": text}}],
                        "usage": {"prompt_tokens": len(prompt.split()),
                                  "completion_tokens": len(text.split()),
                                  "total_tokens": len(prompt.split()) + len(text.split())},
                    })
                finally:
                    outer.stats.leave()

            def _reply(self, status: int, obj: dict) -> None:
                body = json.dumps(obj).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/v1"

    def __enter__(self) -> "ChatServer":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()
