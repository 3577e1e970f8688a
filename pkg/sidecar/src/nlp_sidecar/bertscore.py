"""Token-alignment similarity scoring and results-file merging.

Greedy maximum-cosine alignment between token embeddings of prediction
and reference: precision averages each prediction token's best match,
recall averages each reference token's best match, and the score is
their harmonic mean. Identical strings score exactly 1.0; an empty
prediction scores the defined minimum 0.0. With the model backend this
approximates the usual contextual-embedding formulation; with the lite
backend it degrades to exact-token overlap, which is still deterministic
and well-ordered.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import SidecarError


def _tokens(text: str) -> list[str]:
    return [t.strip(".,;:!?'\"()").casefold() for t in text.split()
            if t.strip(".,;:!?'\"()")]


def bertscore_f1(prediction: str, reference: str, backend) -> float:
    pred_tokens = _tokens(prediction)
    ref_tokens = _tokens(reference)
    if not pred_tokens or not ref_tokens:
        return 0.0
    unique = sorted(set(pred_tokens) | set(ref_tokens))
    vectors = backend.encode(unique)
    lookup = {token: vectors[i] for i, token in enumerate(unique)}
    pred = np.stack([lookup[t] for t in pred_tokens])
    ref = np.stack([lookup[t] for t in ref_tokens])
    similarity = pred @ ref.T
    precision = float(similarity.max(axis=1).mean())
    recall = float(similarity.max(axis=0).mean())
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def score_results(results_path: str | Path, backend) -> list[dict]:
    """Read a results JSONL file and attach a bertscore to every row
    (maximum over the row's references)."""
    results_path = Path(results_path)
    if not results_path.exists():
        raise SidecarError(f"results file not found: {results_path}")
    rows: list[dict] = []
    with results_path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SidecarError(f"line {line_no}: invalid JSON: {exc}") from exc
            references = row.get("references") or []
            prediction = row.get("prediction", "")
            if not references:
                raise SidecarError(f"line {line_no}: row has no references")
            row["bertscore"] = max(
                bertscore_f1(prediction, ref, backend) for ref in references)
            rows.append(row)
    return rows


def bertscore_merge(results_path: str | Path, report_path: str | Path,
                    backend, results_out: str | Path | None = None) -> dict:
    """Attach per-row scores to the results file and fold the aggregate
    into the report JSON (created if absent). Returns the report dict."""
    rows = score_results(results_path, backend)
    if not rows:
        raise SidecarError("results file is empty")
    out_path = Path(results_out) if results_out else Path(results_path)
    with out_path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    report_path = Path(report_path)
    if report_path.exists():
        report = json.loads(report_path.read_text(encoding="utf-8"))
    else:
        report = {"aggregates": {}, "rounded": {}, "examples": len(rows),
                  "per_example": [{} for _ in rows]}
    mean = 100.0 * sum(row["bertscore"] for row in rows) / len(rows)
    report.setdefault("aggregates", {})["bertscore"] = mean
    report.setdefault("rounded", {})["bertscore"] = round(mean)
    per_example = report.get("per_example")
    if isinstance(per_example, list) and len(per_example) == len(rows):
        for entry, row in zip(per_example, rows):
            entry["bertscore"] = row["bertscore"]
    report_path.write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    return report
