"""Embedding backends for the /embed service and BERTScore.

``model`` uses sentence-transformers when the package and weights are
available; ``lite`` is a deterministic hash-seeded fallback with the same
output contract (unit-length float vectors); ``auto`` prefers the model
and silently falls back when it cannot load.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from .config import SidecarError

LITE_DIM = 384  # matches the default sentence model's output width


class LiteBackend:
    name = "lite"

    def __init__(self, dim: int = LITE_DIM, seed: int = 0):
        self.dim = dim
        self.seed = seed

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dim))
        for i, text in enumerate(texts):
            digest = hashlib.sha256(f"{self.seed}|{text}".encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
            out[i] = rng.standard_normal(self.dim)
        return out / np.linalg.norm(out, axis=1, keepdims=True)


class ModelBackend:
    name = "model"

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise SidecarError(f"sentence-transformers is not installed: {exc}") from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise SidecarError(f"cannot load model {model_name!r}: {exc}") from exc
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        vectors = np.asarray(self._model.encode(list(texts)), dtype=np.float64)
        return vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def select_backend(kind: str, model_name: str = "all-MiniLM-L6-v2"):
    if kind == "lite":
        return LiteBackend()
    if kind == "model":
        return ModelBackend(model_name)
    if kind == "auto":
        try:
            return ModelBackend(model_name)
        except SidecarError:
            return LiteBackend()
    raise SidecarError(f"unknown backend kind: {kind!r}")
