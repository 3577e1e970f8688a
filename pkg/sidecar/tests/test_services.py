import json
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from nlp_sidecar.bertscore import bertscore_f1, bertscore_merge, score_results
from nlp_sidecar.config import SidecarError
from nlp_sidecar.embed_backend import LiteBackend, select_backend
from nlp_sidecar.embed_service import make_app

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def client():
    return TestClient(make_app(LiteBackend()))


class TestEmbedService:
    def test_two_texts_two_vectors(self, client):
        response = client.post("/embed", json={"texts": ["tea", "garden"]})
        assert response.status_code == 200
        payload = response.json()
        assert payload["dim"] == 384
        assert len(payload["vectors"]) == 2
        for vector in payload["vectors"]:
            assert len(vector) == payload["dim"]
            assert abs(float(np.linalg.norm(vector)) - 1.0) <= 1e-6

    def test_same_text_identical_vectors(self, client):
        response = client.post("/embed", json={"texts": ["camomile", "camomile"]})
        a, b = response.json()["vectors"]
        assert a == b
        again = client.post("/embed", json={"texts": ["camomile"]})
        assert again.json()["vectors"][0] == a

    def test_recorded_fixture(self, client):
        fixture = json.loads((DATA / "embed_fixture.json").read_text())
        response = client.post("/embed", json={"texts": [fixture["text"]]})
        vector = response.json()["vectors"][0]
        assert response.json()["dim"] == fixture["dim"]
        assert np.allclose(vector, fixture["vector"], atol=1e-9)

    def test_empty_list_and_empty_text(self, client):
        assert client.post("/embed", json={"texts": []}).json()["vectors"] == []
        assert client.post("/embed", json={"texts": [""]}).status_code == 422

    def test_health(self, client):
        payload = client.get("/health").json()
        assert payload["backend"] == "lite"
        assert payload["dim"] == 384


class TestBackendSelection:
    def test_lite_explicit(self):
        assert select_backend("lite").name == "lite"

    def test_auto_degrades_cleanly(self):
        # with no model weights reachable this must not raise
        backend = select_backend("auto")
        assert backend.name in ("lite", "model")
        assert backend.encode(["x"]).shape == (1, backend.dim)

    def test_unknown_backend(self):
        with pytest.raises(SidecarError):
            select_backend("mystery")


class TestBertscore:
    def test_identical_strings_score_one(self):
        backend = LiteBackend()
        assert bertscore_f1("some camomile tea", "some camomile tea",
                            backend) == pytest.approx(1.0, abs=0.02)

    def test_empty_prediction_minimum(self):
        assert bertscore_f1("", "anything", LiteBackend()) == 0.0

    def test_golden_file(self):
        backend = LiteBackend()
        golden = json.loads((DATA / "bertscore_golden.json").read_text())
        for row in golden:
            got = max(bertscore_f1(row["prediction"], ref, backend)
                      for ref in row["references"])
            assert got == pytest.approx(row["bertscore"], abs=1e-9)

    def test_score_results_max_over_references(self, tmp_path):
        results = tmp_path / "results.jsonl"
        results.write_text(
            '{"question": "q", "references": ["camomile tea", "nothing"], '
            '"prediction": "camomile tea"}\n', encoding="utf-8")
        rows = score_results(results, LiteBackend())
        assert rows[0]["bertscore"] == pytest.approx(1.0, abs=1e-9)

    def test_merge_augments_results_and_report(self, tmp_path):
        results = tmp_path / "results.jsonl"
        results.write_text(
            '{"question": "q1", "references": ["tea"], "prediction": "tea"}\n'
            '{"question": "q2", "references": ["tea"], "prediction": "milk"}\n',
            encoding="utf-8")
        report_path = tmp_path / "report.json"
        report_path.write_text(json.dumps({
            "aggregates": {"exact_match": 50.0},
            "rounded": {"exact_match": 50},
            "examples": 2,
            "per_example": [{"em": 1}, {"em": 0}],
        }), encoding="utf-8")
        backend = LiteBackend()
        expected = 100.0 * (bertscore_f1("tea", "tea", backend)
                            + bertscore_f1("milk", "tea", backend)) / 2
        report = bertscore_merge(results, report_path, backend)
        assert report["aggregates"]["bertscore"] == pytest.approx(expected)
        assert report["aggregates"]["exact_match"] == 50.0
        merged_rows = [json.loads(l) for l in results.read_text().splitlines()]
        assert all("bertscore" in row for row in merged_rows)
        on_disk = json.loads(report_path.read_text())
        assert on_disk["per_example"][0]["bertscore"] == pytest.approx(1.0)

    def test_missing_results_file(self, tmp_path):
        with pytest.raises(SidecarError, match="not found"):
            score_results(tmp_path / "missing.jsonl", LiteBackend())
