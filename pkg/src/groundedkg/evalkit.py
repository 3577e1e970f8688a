"""QA metrics: exact match, sequence match, ROUGE-L F1, and report tables.

Normalization is pinned for reproducibility: lowercase, split on Unicode
whitespace, strip punctuation from token edges. Exact match tests whether
the normalized reference appears as a contiguous token run inside the
normalized prediction, so an exact match always implies a sequence match.
With several references per example, each metric takes its maximum.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import EvalError


def _strip_edge_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def normalize_tokens(text: str) -> list[str]:
    tokens = []
    for raw in text.casefold().split():
        token = _strip_edge_punct(raw)
        if token:
            tokens.append(token)
    return tokens


def normalize_text(text: str) -> str:
    return " ".join(normalize_tokens(text))


def exact_match(prediction: str, reference: str) -> int:
    """1 iff the normalized reference occurs contiguously in the prediction."""
    pred = normalize_text(prediction)
    ref = normalize_text(reference)
    return 1 if f" {ref} " in f" {pred} " else 0


def sequence_match(prediction: str, reference: str) -> int:
    """1 iff the reference tokens occur in order (gaps allowed) in the prediction."""
    pred_tokens = normalize_tokens(prediction)
    ref_tokens = normalize_tokens(reference)
    position = 0
    for token in pred_tokens:
        if position < len(ref_tokens) and token == ref_tokens[position]:
            position += 1
    return 1 if position == len(ref_tokens) else 0


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l_f1(prediction: str, reference: str) -> float:
    """Harmonic mean of LCS precision and recall over normalized tokens."""
    pred_tokens = normalize_tokens(prediction)
    ref_tokens = normalize_tokens(reference)
    if not pred_tokens or not ref_tokens:
        return 0.0
    lcs = _lcs_length(pred_tokens, ref_tokens)
    if lcs == 0:
        return 0.0
    precision = lcs / len(pred_tokens)
    recall = lcs / len(ref_tokens)
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class QaExample:
    question: str
    references: tuple[str, ...]
    prediction: str
    context_text_ids: tuple[str, ...] = ()
    bertscore: float | None = None  # merged in by external tooling when present

    def __post_init__(self):
        if not self.references:
            raise EvalError(f"example {self.question!r} has no references")


@dataclass(frozen=True)
class ExampleScores:
    em: int
    sm: int
    rouge_l_f1: float
    bertscore: float | None = None


@dataclass
class MetricReport:
    per_example: list[ExampleScores]
    aggregates: dict[str, float]  # metric -> mean as a percentage

    def has_bertscore(self) -> bool:
        return "bertscore" in self.aggregates


def score_example(example: QaExample) -> ExampleScores:
    return ExampleScores(
        em=max(exact_match(example.prediction, ref) for ref in example.references),
        sm=max(sequence_match(example.prediction, ref) for ref in example.references),
        rouge_l_f1=max(rouge_l_f1(example.prediction, ref) for ref in example.references),
        bertscore=example.bertscore,
    )


def evaluate(examples: Sequence[QaExample]) -> MetricReport:
    """Score every example and aggregate means as percentages."""
    if not examples:
        raise EvalError("cannot evaluate an empty result set")
    scored = [score_example(example) for example in examples]
    n = len(scored)
    aggregates = {
        "exact_match": 100.0 * sum(s.em for s in scored) / n,
        "sequence_match": 100.0 * sum(s.sm for s in scored) / n,
        "rouge_l_f1": 100.0 * sum(s.rouge_l_f1 for s in scored) / n,
    }
    if all(s.bertscore is not None for s in scored):
        aggregates["bertscore"] = 100.0 * sum(s.bertscore for s in scored) / n
    return MetricReport(per_example=scored, aggregates=aggregates)


def load_results(path: str | Path) -> list[QaExample]:
    """Read a line-delimited JSON results file."""
    path = Path(path)
    if not path.exists():
        raise EvalError(f"results file not found: {path}")
    examples: list[QaExample] = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EvalError(f"line {line_no}: invalid JSON: {exc}") from exc
            try:
                examples.append(QaExample(
                    question=record["question"],
                    references=tuple(record["references"]),
                    prediction=record["prediction"],
                    context_text_ids=tuple(record.get("context_text_ids", ())),
                    bertscore=record.get("bertscore"),
                ))
            except KeyError as exc:
                raise EvalError(f"line {line_no}: record is missing field {exc}") from exc
    return examples


_COLUMNS = [
    ("exact_match", "Exact match"),
    ("sequence_match", "Sequence match"),
    ("bertscore", "BERTScore"),
    ("rouge_l_f1", "RougeL F1"),
]


def render_report(report: MetricReport) -> str:
    """Aligned text table; BERTScore column appears only when merged in."""
    columns = [(key, title) for key, title in _COLUMNS if key in report.aggregates]
    widths = [max(len(title), 6) for _, title in columns]
    header = "  ".join(title.ljust(w) for (_, title), w in zip(columns, widths))
    values = "  ".join(
        str(round(report.aggregates[key])).ljust(w) for (key, _), w in zip(columns, widths))
    return f"{header}\n{values}"


def report_to_dict(report: MetricReport) -> dict:
    return {
        "aggregates": {k: report.aggregates[k] for k in sorted(report.aggregates)},
        "rounded": {k: round(v) for k, v in sorted(report.aggregates.items())},
        "examples": len(report.per_example),
        "per_example": [
            {
                "em": s.em,
                "sm": s.sm,
                "rouge_l_f1": s.rouge_l_f1,
                **({"bertscore": s.bertscore} if s.bertscore is not None else {}),
            }
            for s in report.per_example
        ],
    }
