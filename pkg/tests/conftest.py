import json
from pathlib import Path

import pytest

from groundedkg.embed_index import build_index
from groundedkg.kg_builder import build_graph
from groundedkg.parse_ingest import load_parse_bundle
from groundedkg.providers import StubEmbedder

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def camomile_amr_parse():
    return load_parse_bundle(DATA / "camomile_amr.jsonl")


@pytest.fixture(scope="session")
def camomile_srl_parse():
    return load_parse_bundle(DATA / "camomile_srl.jsonl")


@pytest.fixture(scope="session")
def book_parse():
    return load_parse_bundle(DATA / "peter_rabbit_amr.jsonl")


@pytest.fixture(scope="session")
def book_graph(book_parse):
    return build_graph(book_parse)


@pytest.fixture(scope="session")
def book_embedder():
    return StubEmbedder(dim=64)


@pytest.fixture(scope="session")
def book_index(book_graph, book_embedder):
    return build_index(book_graph, book_embedder, scheme="basic", alpha=0.5)


@pytest.fixture(scope="session")
def acceptance_questions():
    return json.loads((DATA / "acceptance_questions.json").read_text())
