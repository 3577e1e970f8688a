"""Vector index over graph nodes.

Three aggregation schemes produce one unit vector per node:

- ``basic``: a weighted blend of the label embedding and the mean of the
  mention-text embeddings, ``alpha * f(label) + (1 - alpha) * mean(f(texts))``;
- ``neighbor_avg``: blends the basic vector with the mean of the basic
  vectors of graph neighbors (edge direction ignored),
  ``beta * basic(v) + (1 - beta) * mean(basic(neighbors))``;
- ``neighbor_attn``: like ``neighbor_avg`` but neighbors are combined with
  softmax attention weights over dot products of the basic vectors.

Vectors are re-normalized after every aggregation step: after each raw
embedding, after the text mean, after the neighbor aggregate, and after
each blend. Nodes with no texts use the label embedding alone; nodes with
no neighbors keep their basic vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IndexError_, ProviderError
from .kg_builder import GroundedKg
from .providers import Embedder

BASIC = "basic"
NEIGHBOR_AVG = "neighbor_avg"
NEIGHBOR_ATTN = "neighbor_attn"
SCHEMES = (BASIC, NEIGHBOR_AVG, NEIGHBOR_ATTN)

_NORM_TOL = 1e-6


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm < 1e-12:
        raise IndexError_("cannot normalize a zero vector")
    return vec / norm


@dataclass(eq=False)
class NodeIndex:
    scheme: str
    alpha: float
    beta: float
    dim: int
    vectors: dict[str, np.ndarray]
    _node_ids: list[str] = field(default=None, repr=False)
    _matrix: np.ndarray = field(default=None, repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NodeIndex):
            return NotImplemented
        return (
            self.scheme == other.scheme
            and self.alpha == other.alpha
            and self.beta == other.beta
            and self.dim == other.dim
            and set(self.vectors) == set(other.vectors)
            and all(np.array_equal(v, other.vectors[k]) for k, v in self.vectors.items())
        )

    def matrix(self) -> tuple[list[str], np.ndarray]:
        """Node ids (ascending) and the stacked vector matrix, cached."""
        if self._matrix is None:
            self._node_ids = sorted(self.vectors)
            self._matrix = (
                np.stack([self.vectors[i] for i in self._node_ids])
                if self._node_ids else np.zeros((0, self.dim)))
        return self._node_ids, self._matrix

    def validate(self, kg: GroundedKg | None = None) -> None:
        for node_id, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise IndexError_(f"vector for {node_id} has shape {vec.shape}")
            if abs(float(np.linalg.norm(vec)) - 1.0) > _NORM_TOL:
                raise IndexError_(f"vector for {node_id} is not unit length")
        if kg is not None and set(self.vectors) != set(kg.nodes):
            raise IndexError_("index does not cover exactly the graph's node set")


def _check_params(alpha: float, beta: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise IndexError_(f"alpha must be in [0, 1], got {alpha}")
    if not 0.0 <= beta <= 1.0:
        raise IndexError_(f"beta must be in [0, 1], got {beta}")


def _basic_vectors(kg: GroundedKg, embedder: Embedder, alpha: float) -> dict[str, np.ndarray]:
    strings: list[str] = []
    seen: set[str] = set()
    for node in kg.nodes.values():
        for text in [node.label, *node.texts]:
            if text not in seen:
                seen.add(text)
                strings.append(text)
    if not strings:
        return {}
    try:
        raw = embedder.embed_texts(strings)
    except ProviderError as exc:
        raise IndexError_(f"embedding provider failed while indexing: {exc}") from exc
    lookup = {text: _unit(raw[i]) for i, text in enumerate(strings)}
    vectors: dict[str, np.ndarray] = {}
    for node in kg.nodes.values():
        label_vec = lookup[node.label]
        if node.texts:
            text_mean = _unit(np.mean([lookup[t] for t in node.texts], axis=0))
            vectors[node.node_id] = _unit(alpha * label_vec + (1.0 - alpha) * text_mean)
        else:
            vectors[node.node_id] = label_vec
    return vectors


def embed_nodes_basic(kg: GroundedKg, embedder: Embedder, alpha: float = 0.5) -> NodeIndex:
    _check_params(alpha, 1.0)
    vectors = _basic_vectors(kg, embedder, alpha)
    dim = embedder.dim if embedder.dim else (len(next(iter(vectors.values()))) if vectors else 0)
    index = NodeIndex(scheme=BASIC, alpha=alpha, beta=1.0, dim=dim, vectors=vectors)
    index.validate(kg)
    return index


def _aggregate_index(kg: GroundedKg, embedder: Embedder, alpha: float, beta: float,
                     scheme: str) -> NodeIndex:
    _check_params(alpha, beta)
    basic = _basic_vectors(kg, embedder, alpha)
    adjacency = kg.adjacency()
    vectors: dict[str, np.ndarray] = {}
    for node_id, own in basic.items():
        neighbors = adjacency.get(node_id, [])
        if not neighbors:
            vectors[node_id] = own
            continue
        stacked = np.stack([basic[n] for n in neighbors])
        if scheme == NEIGHBOR_AVG:
            aggregate = np.mean(stacked, axis=0)
        else:
            scores = stacked @ own
            weights = np.exp(scores - np.max(scores))
            weights /= weights.sum()
            aggregate = weights @ stacked
        aggregate = _unit(aggregate)
        vectors[node_id] = _unit(beta * own + (1.0 - beta) * aggregate)
    dim = embedder.dim if embedder.dim else (len(next(iter(vectors.values()))) if vectors else 0)
    index = NodeIndex(scheme=scheme, alpha=alpha, beta=beta, dim=dim, vectors=vectors)
    index.validate(kg)
    return index


def embed_nodes_neighbor_avg(kg: GroundedKg, embedder: Embedder, alpha: float = 0.5,
                             beta: float = 0.8) -> NodeIndex:
    return _aggregate_index(kg, embedder, alpha, beta, NEIGHBOR_AVG)


def embed_nodes_neighbor_attn(kg: GroundedKg, embedder: Embedder, alpha: float = 0.5,
                              beta: float = 0.8) -> NodeIndex:
    return _aggregate_index(kg, embedder, alpha, beta, NEIGHBOR_ATTN)


def build_index(kg: GroundedKg, embedder: Embedder, scheme: str = BASIC,
                alpha: float = 0.5, beta: float = 0.8) -> NodeIndex:
    if scheme == BASIC:
        return embed_nodes_basic(kg, embedder, alpha)
    if scheme == NEIGHBOR_AVG:
        return embed_nodes_neighbor_avg(kg, embedder, alpha, beta)
    if scheme == NEIGHBOR_ATTN:
        return embed_nodes_neighbor_attn(kg, embedder, alpha, beta)
    raise IndexError_(f"unknown embedding scheme: {scheme!r}")


def top_k(index: NodeIndex, query_vec: np.ndarray, k: int) -> list[tuple[str, float]]:
    """The k nodes most cosine-similar to the query, descending.

    Ties break on ascending node id; fewer than k nodes returns them all.
    """
    if k <= 0:
        raise IndexError_(f"k must be positive, got {k}")
    query_vec = np.asarray(query_vec, dtype=np.float64)
    if query_vec.shape != (index.dim,):
        raise IndexError_(
            f"query vector has shape {query_vec.shape}, index dim is {index.dim}")
    node_ids, matrix = index.matrix()
    if not node_ids:
        return []
    scores = matrix @ query_vec
    ranked = sorted(zip(node_ids, scores), key=lambda pair: (-pair[1], pair[0]))
    return [(node_id, float(score)) for node_id, score in ranked[:k]]


# ---------------------------------------------------------------------------
# Persistence


def save_index(index: NodeIndex, path: str | Path) -> None:
    """Write the index as JSON with entries sorted by node id."""
    payload = {
        "scheme": index.scheme,
        "alpha": index.alpha,
        "beta": index.beta,
        "dim": index.dim,
        "entries": [
            {"node_id": node_id, "vector": [float(x) for x in index.vectors[node_id]]}
            for node_id in sorted(index.vectors)
        ],
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=1) + "\n",
                          encoding="utf-8")


def load_index(path: str | Path) -> NodeIndex:
    path = Path(path)
    if not path.exists():
        raise IndexError_(f"index file not found: {path}")
    data = json.loads(path.read_text(encoding="utf-8"))
    if data.get("scheme") not in SCHEMES:
        raise IndexError_(f"index file has unknown scheme {data.get('scheme')!r}")
    vectors = {
        entry["node_id"]: np.asarray(entry["vector"], dtype=np.float64)
        for entry in data["entries"]
    }
    index = NodeIndex(scheme=data["scheme"], alpha=float(data["alpha"]),
                      beta=float(data["beta"]), dim=int(data["dim"]), vectors=vectors)
    index.validate()
    return index
