"""Text-embedding providers behind one narrow interface.

Every provider returns one unit-length vector per input text, order
preserved. Three kinds exist:

- ``stub``: deterministic hash-seeded random vectors, for offline runs and
  tests;
- ``file_cache``: lookups into a precomputed binary table keyed by the
  SHA-256 of the text, for fully offline book-scale runs;
- ``http``: a POST /embed JSON service (``{"texts": [...]}`` in,
  ``{"dim": n, "vectors": [[...]]}`` out).
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path
from typing import Sequence

import httpx
import numpy as np

from .errors import ConfigError, ProviderError

CACHE_MAGIC = b"GKGVEC01"


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if np.any(norms < 1e-12):
        raise ProviderError("provider returned a zero vector")
    return matrix / norms


def _check_texts(texts: Sequence[str]) -> None:
    for i, text in enumerate(texts):
        if not isinstance(text, str) or not text:
            raise ProviderError(f"embed input {i} is empty or not a string")


class Embedder:
    """Interface: ``embed_texts`` maps texts to a (n, dim) float64 array."""

    kind: str = "base"
    dim: int | None = None

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        raise NotImplementedError

    def embed_one(self, text: str) -> np.ndarray:
        return self.embed_texts([text])[0]


class StubEmbedder(Embedder):
    """Seeded hash-of-text vectors. Same text always maps to the same
    unit vector; unrelated texts are near-orthogonal at moderate dims."""

    kind = "stub"

    def __init__(self, dim: int = 64, seed: int = 0):
        if dim <= 0:
            raise ConfigError("embedding dim must be positive")
        self.dim = dim
        self.seed = seed

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        _check_texts(texts)
        out = np.empty((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            digest = hashlib.sha256(f"{self.seed}\x00{text}".encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            out[i] = rng.standard_normal(self.dim)
        return _normalize_rows(out)


class FileCacheEmbedder(Embedder):
    """Precomputed vectors from a binary table file.

    File layout (little-endian): 8-byte magic, uint32 dim, uint64 count,
    then per entry a 32-byte SHA-256 of the UTF-8 text followed by
    ``dim`` float32 components.
    """

    kind = "file_cache"

    def __init__(self, path: str | Path):
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"vector cache not found: {path}")
        raw = path.read_bytes()
        if raw[:8] != CACHE_MAGIC:
            raise ProviderError(f"{path} is not a vector cache file")
        dim, count = struct.unpack_from("<IQ", raw, 8)
        self.dim = int(dim)
        self._table: dict[bytes, np.ndarray] = {}
        offset = 8 + 12
        entry = 32 + 4 * self.dim
        if len(raw) != offset + entry * count:
            raise ProviderError(f"{path} is truncated")
        for _ in range(count):
            key = raw[offset:offset + 32]
            vec = np.frombuffer(raw, dtype="<f4", count=self.dim, offset=offset + 32)
            self._table[key] = vec.astype(np.float64)
            offset += entry

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        _check_texts(texts)
        out = np.empty((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            key = hashlib.sha256(text.encode("utf-8")).digest()
            vec = self._table.get(key)
            if vec is None:
                raise ProviderError(f"text not in vector cache: {text[:60]!r}")
            out[i] = vec
        return _normalize_rows(out)


def write_vector_cache(path: str | Path, texts: Sequence[str], vectors: np.ndarray) -> None:
    """Write a FileCacheEmbedder table. Later duplicates of a text win."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or len(texts) != vectors.shape[0]:
        raise ProviderError("texts and vectors must align")
    entries: dict[bytes, np.ndarray] = {}
    for text, vec in zip(texts, vectors):
        entries[hashlib.sha256(text.encode("utf-8")).digest()] = vec
    dim = vectors.shape[1]
    blob = bytearray(CACHE_MAGIC)
    blob += struct.pack("<IQ", dim, len(entries))
    for key in sorted(entries):
        blob += key
        blob += entries[key].astype("<f4").tobytes()
    Path(path).write_bytes(bytes(blob))


class HttpEmbedder(Embedder):
    """Client for the POST /embed protocol."""

    kind = "http"

    def __init__(self, endpoint: str, timeout: float = 30.0, batch_size: int = 128):
        if not endpoint.startswith(("http://", "https://")):
            raise ConfigError(f"embed endpoint must be an http(s) URL: {endpoint!r}")
        if batch_size <= 0:
            raise ConfigError("batch_size must be positive")
        self.endpoint = endpoint
        self.batch_size = batch_size
        self.dim = None
        self._client = httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        _check_texts(texts)
        rows: list[np.ndarray] = []
        for start in range(0, len(texts), self.batch_size):
            batch = list(texts[start:start + self.batch_size])
            try:
                response = self._client.post(self.endpoint, json={"texts": batch})
            except httpx.HTTPError as exc:
                raise ProviderError(f"embed request failed: {exc}") from exc
            if response.status_code != 200:
                raise ProviderError(
                    f"embed service returned {response.status_code}: {response.text[:200]}")
            payload = response.json()
            vectors = payload.get("vectors")
            dim = payload.get("dim")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise ProviderError("embed service returned a mismatched vector count")
            if self.dim is None:
                self.dim = int(dim)
            elif int(dim) != self.dim:
                raise ProviderError(f"embed service changed dim: {dim} != {self.dim}")
            matrix = np.asarray(vectors, dtype=np.float64)
            if matrix.shape != (len(batch), self.dim):
                raise ProviderError(f"embed service returned shape {matrix.shape}")
            rows.append(matrix)
        return _normalize_rows(np.vstack(rows))


def make_embedder(config: dict) -> Embedder:
    """Build an embedder from a config mapping with a ``kind`` field."""
    kind = config.get("kind", "stub")
    if kind == "stub":
        return StubEmbedder(dim=int(config.get("dim", 64)), seed=int(config.get("seed", 0)))
    if kind == "file_cache":
        return FileCacheEmbedder(config["path"])
    if kind == "http":
        return HttpEmbedder(
            endpoint=config["endpoint"],
            timeout=float(config.get("timeout", 30.0)),
            batch_size=int(config.get("batch_size", 128)),
        )
    raise ConfigError(f"unknown embedder kind: {kind!r}")


def embed_texts(handle: Embedder, texts: Sequence[str]) -> np.ndarray:
    """Module-level convenience mirroring ``handle.embed_texts``."""
    return handle.embed_texts(texts)
