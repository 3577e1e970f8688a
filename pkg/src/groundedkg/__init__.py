"""Sentence-grounded knowledge-graph retrieval for long documents.

Pipeline: parse bundle -> grounded graph -> node vector index -> query-graph
retrieval of grounded sentences -> prompt + pluggable LLM -> QA metrics.
"""

from .embed_index import (
    NodeIndex,
    build_index,
    embed_nodes_basic,
    embed_nodes_neighbor_attn,
    embed_nodes_neighbor_avg,
    load_index,
    save_index,
    top_k,
)
from .evalkit import QaExample, evaluate, exact_match, rouge_l_f1, sequence_match
from .kg_builder import (
    GroundedKg,
    KgEdge,
    KgNode,
    build_from_amr,
    build_from_srl,
    build_query_graph,
    export_graph,
    load_graph,
)
from .parse_ingest import (
    AmrGraph,
    DocumentParse,
    SentenceRecord,
    SrlArg,
    SrlFrame,
    load_parse_bundle,
)
from .penman import encode_penman, parse_penman
from .providers import Embedder, FileCacheEmbedder, HttpEmbedder, StubEmbedder, make_embedder
from .ragen import LlmClient, PromptSpec, StubLlm, answer, answer_batch, build_prompt
from .retrieval import RetrievalParams, RetrievalResult, VectorSimParams, retrieve

__version__ = "0.1.0"
