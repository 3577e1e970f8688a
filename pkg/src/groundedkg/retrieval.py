"""Query-time pipeline: query graph, per-node top-K, grounded-text union,
optional filters, and document-ordered context assembly.

The query is parsed with the same graph construction as the document and
its nodes are embedded with the same scheme and weights as the index.
Every retrieved node contributes its grounded sentences to the selection;
the optional count filter keeps sentences grounded by at least
``ret_count_min`` distinct retrieved nodes, and the optional vector filter
keeps sentences whose embedding is cosine-similar enough to the query.
The count filter runs first: it is free, while the vector filter costs
embedding calls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import RetrievalError
from .kg_builder import GroundedKg, KgNode, build_query_graph
from .parse_ingest import DocumentParse, SentenceRecord, parse_text_id
from .providers import Embedder
from . import embed_index
from .embed_index import NodeIndex, top_k

FILTER_RET_COUNT = "ret_count"
FILTER_VECTOR_SIM = "vector_sim"


@dataclass(frozen=True)
class VectorSimParams:
    tau: float
    top_k_texts: int | None = None  # None keeps every text above tau


@dataclass(frozen=True)
class RetrievalParams:
    k: int = 10
    vector_sim: VectorSimParams | None = None
    ret_count_min: int | None = None
    max_context_sentences: int | None = None

    def validate(self) -> None:
        if self.k <= 0:
            raise RetrievalError(f"k must be positive, got {self.k}")
        if self.vector_sim is not None:
            if not -1.0 <= self.vector_sim.tau <= 1.0:
                raise RetrievalError(f"tau must be in [-1, 1], got {self.vector_sim.tau}")
            if self.vector_sim.top_k_texts is not None and self.vector_sim.top_k_texts <= 0:
                raise RetrievalError("top_k_texts must be positive when set")
        if self.ret_count_min is not None and self.ret_count_min <= 0:
            raise RetrievalError("ret_count_min must be positive when set")
        if self.max_context_sentences is not None and self.max_context_sentences <= 0:
            raise RetrievalError("max_context_sentences must be positive when set")


@dataclass
class TextDiagnostics:
    retrieval_count: int
    vector_sim: float | None = None
    filtered_by: str | None = None


@dataclass
class RetrievalResult:
    query: str
    per_query_node: dict[str, list[tuple[str, float]]]
    selected_texts: list[tuple[str, str]]  # (text_id, sentence) in document order
    diagnostics: dict[str, TextDiagnostics]

    def selected_ids(self) -> list[str]:
        return [text_id for text_id, _ in self.selected_texts]

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "per_query_node": {
                node_id: [{"node_id": n, "score": s} for n, s in ranked]
                for node_id, ranked in self.per_query_node.items()
            },
            "selected_texts": [
                {"text_id": text_id, "sentence": sentence}
                for text_id, sentence in self.selected_texts
            ],
            "diagnostics": {
                text_id: {
                    "retrieval_count": diag.retrieval_count,
                    "vector_sim": diag.vector_sim,
                    "filtered_by": diag.filtered_by,
                }
                for text_id, diag in sorted(self.diagnostics.items())
            },
        }


# JSON shape of a serialized RetrievalResult, for trace-file validation.
TRACE_SCHEMA = {
    "type": "object",
    "required": ["query", "per_query_node", "selected_texts", "diagnostics"],
    "properties": {
        "query": {"type": "string"},
        "per_query_node": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["node_id", "score"],
                    "properties": {
                        "node_id": {"type": "string"},
                        "score": {"type": "number"},
                    },
                },
            },
        },
        "selected_texts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["text_id", "sentence"],
                "properties": {
                    "text_id": {"type": "string"},
                    "sentence": {"type": "string"},
                },
            },
        },
        "diagnostics": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["retrieval_count"],
                "properties": {
                    "retrieval_count": {"type": "integer", "minimum": 0},
                    "vector_sim": {"type": ["number", "null"]},
                    "filtered_by": {"type": ["string", "null"]},
                },
            },
        },
    },
}


def ret_counts(selected_ids: Iterable[str], retrieved_nodes: Iterable[KgNode]) -> dict[str, int]:
    """How many distinct retrieved nodes ground each selected sentence."""
    grounded_sets = [set(node.grounded_texts) for node in retrieved_nodes]
    return {
        text_id: sum(1 for grounded in grounded_sets if text_id in grounded)
        for text_id in selected_ids
    }


def filter_ret_count(selected_ids: Sequence[str], retrieved_nodes: Iterable[KgNode],
                     min_count: int) -> tuple[list[str], dict[str, int]]:
    """Keep sentences grounded by at least ``min_count`` retrieved nodes."""
    counts = ret_counts(selected_ids, retrieved_nodes)
    kept = [text_id for text_id in selected_ids if counts[text_id] >= min_count]
    return kept, counts


def filter_vector_sim(selected: Sequence[tuple[str, str]], query_text: str,
                      embedder: Embedder, tau: float,
                      top_k_texts: int | None = None,
                      ) -> tuple[list[str], dict[str, float]]:
    """Keep sentences with cos(f(query), f(sentence)) >= tau, then the
    ``top_k_texts`` best when a cap is given. Returns kept ids and all scores."""
    if not selected:
        return [], {}
    query_vec = embedder.embed_one(query_text)
    sentence_vecs = embedder.embed_texts([sentence for _, sentence in selected])
    scores = {
        text_id: float(np.dot(query_vec, sentence_vecs[i]))
        for i, (text_id, _) in enumerate(selected)
    }
    kept = [text_id for text_id, _ in selected if scores[text_id] >= tau]
    if top_k_texts is not None and len(kept) > top_k_texts:
        kept = sorted(kept, key=lambda t: (-scores[t], t))[:top_k_texts]
        kept = [text_id for text_id, _ in selected if text_id in set(kept)]
    return kept, scores


def _sentence_display(record: SentenceRecord) -> str:
    return record.coref_resolved or record.original


def assemble_context(selected: Sequence[tuple[str, str]],
                     max_sentences: int | None = None) -> str:
    """One sentence per line, "text_id<TAB>sentence", in document order."""
    ordered = sorted(selected, key=lambda pair: parse_text_id(pair[0]))
    if max_sentences is not None:
        ordered = ordered[:max_sentences]
    return "\n".join(f"{text_id}\t{sentence}" for text_id, sentence in ordered)


def _synthetic_query_parse(query: str) -> DocumentParse:
    record = SentenceRecord.make(0, 0, query)
    return DocumentParse(doc_id="query", sentences=[record], parses={}, parse_kind="amr")


def retrieve(query: str, kg: GroundedKg, index: NodeIndex, embedder: Embedder,
             params: RetrievalParams | None = None,
             query_parse: DocumentParse | None = None) -> RetrievalResult:
    """Run the full retrieval pipeline for one query.

    ``query_parse`` carries the upstream semantic parse of the query; when
    absent the query collapses to a single whole-string node. No text
    generation happens here.
    """
    if not query or not query.strip():
        raise RetrievalError("query must be non-empty")
    params = params or RetrievalParams()
    params.validate()
    if not index.vectors:
        raise RetrievalError("index is empty")
    index.validate(kg)

    if query_parse is None:
        query_parse = _synthetic_query_parse(query)
    query_kg = build_query_graph(query_parse)
    query_index = embed_index.build_index(
        query_kg, embedder, scheme=index.scheme, alpha=index.alpha, beta=index.beta)

    per_query_node: dict[str, list[tuple[str, float]]] = {}
    retrieved_ids: set[str] = set()
    for node_id in sorted(query_kg.nodes):
        ranked = top_k(index, query_index.vectors[node_id], params.k)
        per_query_node[node_id] = ranked
        retrieved_ids.update(n for n, _ in ranked)
    retrieved_nodes = [kg.nodes[n] for n in sorted(retrieved_ids)]

    selected_set: set[str] = set()
    for node in retrieved_nodes:
        selected_set.update(node.grounded_texts)
    selected_ids = sorted(selected_set, key=parse_text_id)
    counts = ret_counts(selected_ids, retrieved_nodes)
    diagnostics = {
        text_id: TextDiagnostics(retrieval_count=counts[text_id])
        for text_id in selected_ids
    }

    kept = list(selected_ids)
    if params.ret_count_min is not None:
        kept, _ = filter_ret_count(kept, retrieved_nodes, params.ret_count_min)
        for text_id in selected_ids:
            if text_id not in set(kept) and diagnostics[text_id].filtered_by is None:
                diagnostics[text_id].filtered_by = FILTER_RET_COUNT
    if params.vector_sim is not None and kept:
        pairs = [(text_id, _sentence_display(kg.sentence_table[text_id])) for text_id in kept]
        surviving, scores = filter_vector_sim(
            pairs, query, embedder, params.vector_sim.tau, params.vector_sim.top_k_texts)
        for text_id, score in scores.items():
            diagnostics[text_id].vector_sim = score
        surviving_set = set(surviving)
        for text_id in kept:
            if text_id not in surviving_set:
                diagnostics[text_id].filtered_by = FILTER_VECTOR_SIM
        kept = surviving

    selected_texts = [
        (text_id, _sentence_display(kg.sentence_table[text_id]))
        for text_id in sorted(kept, key=parse_text_id)
    ]
    return RetrievalResult(
        query=query,
        per_query_node=per_query_node,
        selected_texts=selected_texts,
        diagnostics=diagnostics,
    )


def write_trace(result: RetrievalResult, path: str | Path) -> None:
    """Dump the full retrieval result (with diagnostics) for error analysis."""
    Path(path).write_text(
        json.dumps(result.to_dict(), ensure_ascii=False, indent=1) + "\n",
        encoding="utf-8")
