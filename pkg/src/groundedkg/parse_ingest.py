"""Loading and validation of document parse bundles.

A bundle is a line-delimited JSON file produced upstream. Three record
kinds are understood (unknown *fields* are ignored, ``comment`` records are
skipped, any other kind is rejected):

- ``{"kind": "sentence", "doc_id", "chunk_index", "sent_index",
   "original", "normalized", "coref_resolved"}``
- ``{"kind": "amr", "text_id", "penman": "<string>"}``
- ``{"kind": "srl", "text_id", "predicate", "pred_span": [s, e],
   "args": [{"role", "text", "span": [s, e]}]}``
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BundleError
from .penman import AmrGraph, parse_penman

AMR = "amr"
SRL = "srl"

_TEXT_ID_RE = re.compile(r"^text_(\d+)-(\d+)$")


def make_text_id(chunk_index: int, sent_index: int) -> str:
    return f"text_{chunk_index}-{sent_index}"


def parse_text_id(text_id: str) -> tuple[int, int]:
    """Split "text_{chunk}-{sent}" into its integer pair."""
    m = _TEXT_ID_RE.match(text_id)
    if not m:
        raise BundleError(f"malformed text id: {text_id!r}")
    return int(m.group(1)), int(m.group(2))


@dataclass(frozen=True)
class SentenceRecord:
    """One coreference-resolved sentence with its stable grounding id."""

    chunk_index: int
    sent_index: int
    text_id: str
    original: str
    normalized: str
    coref_resolved: str

    @classmethod
    def make(cls, chunk_index: int, sent_index: int, original: str,
             normalized: str = "", coref_resolved: str = "") -> "SentenceRecord":
        return cls(
            chunk_index=chunk_index,
            sent_index=sent_index,
            text_id=make_text_id(chunk_index, sent_index),
            original=original,
            normalized=normalized or original,
            coref_resolved=coref_resolved or original,
        )


@dataclass(frozen=True)
class SrlArg:
    role: str
    text: str
    span: tuple[int, int]


@dataclass(frozen=True)
class SrlFrame:
    """One predicate-argument frame over the coref-resolved sentence text."""

    predicate_lemma: str
    predicate_char_span: tuple[int, int]
    args: tuple[SrlArg, ...]
    sentence_ref: str


@dataclass
class DocumentParse:
    """All sentences of one document plus their semantic parses."""

    doc_id: str
    sentences: list[SentenceRecord]
    parses: dict[str, list]  # text_id -> list[AmrGraph] | list[SrlFrame]
    parse_kind: str = AMR

    def sentence_map(self) -> dict[str, SentenceRecord]:
        return {s.text_id: s for s in self.sentences}


def validate_document(parse: DocumentParse) -> None:
    """Check every DocumentParse invariant; raise BundleError on the first violation."""
    if parse.parse_kind not in (AMR, SRL):
        raise BundleError(f"unknown parse kind: {parse.parse_kind!r}")
    seen: set[str] = set()
    for s in parse.sentences:
        if s.chunk_index < 0 or s.sent_index < 0:
            raise BundleError(f"negative chunk/sentence index in {s.text_id}")
        if s.text_id != make_text_id(s.chunk_index, s.sent_index):
            raise BundleError(
                f"text id {s.text_id!r} does not match indices "
                f"({s.chunk_index}, {s.sent_index})")
        if s.text_id in seen:
            raise BundleError(f"duplicate sentence id {s.text_id}")
        seen.add(s.text_id)
        if s.original and not s.coref_resolved:
            raise BundleError(f"sentence {s.text_id} has empty coref_resolved text")
    order = [(s.chunk_index, s.sent_index) for s in parse.sentences]
    if order != sorted(order):
        raise BundleError("sentences are not sorted by (chunk_index, sent_index)")
    table = parse.sentence_map()
    for text_id, entries in parse.parses.items():
        if text_id not in table:
            raise BundleError(f"parse references unknown sentence {text_id}")
        sentence = table[text_id]
        for entry in entries:
            if entry.sentence_ref != text_id:
                raise BundleError(f"parse under {text_id} carries sentence_ref {entry.sentence_ref!r}")
            if isinstance(entry, SrlFrame):
                limit = len(sentence.coref_resolved)
                spans = [entry.predicate_char_span] + [a.span for a in entry.args]
                for start, end in spans:
                    if not (0 <= start <= end <= limit):
                        raise BundleError(
                            f"span ({start}, {end}) outside sentence {text_id} "
                            f"(length {limit})")
                for a in entry.args:
                    if not a.role or a.role != a.role.upper():
                        raise BundleError(f"bad role tag {a.role!r} in frame at {text_id}")


def _require(record: dict, key: str, line_no: int):
    if key not in record:
        raise BundleError(f"line {line_no}: record is missing field {key!r}: {record}")
    return record[key]


def _load_sentence(record: dict, line_no: int) -> tuple[str, SentenceRecord]:
    doc_id = str(record.get("doc_id", ""))
    chunk = _require(record, "chunk_index", line_no)
    sent = _require(record, "sent_index", line_no)
    original = str(_require(record, "original", line_no))
    if not isinstance(chunk, int) or not isinstance(sent, int) or chunk < 0 or sent < 0:
        raise BundleError(f"line {line_no}: chunk/sent indices must be non-negative integers")
    return doc_id, SentenceRecord.make(
        chunk_index=chunk,
        sent_index=sent,
        original=original,
        normalized=str(record.get("normalized", "")),
        coref_resolved=str(record.get("coref_resolved", "")),
    )


def _load_amr(record: dict, line_no: int) -> AmrGraph:
    text_id = str(_require(record, "text_id", line_no))
    penman_text = str(_require(record, "penman", line_no))
    try:
        graph = parse_penman(penman_text)
    except Exception as exc:
        raise BundleError(f"line {line_no}: bad PENMAN for {text_id}: {exc}") from exc
    graph.sentence_ref = text_id
    return graph


def _load_srl(record: dict, line_no: int) -> SrlFrame:
    text_id = str(_require(record, "text_id", line_no))
    pred = str(_require(record, "predicate", line_no))
    span = _require(record, "pred_span", line_no)
    args = []
    for arg in record.get("args", []):
        args.append(SrlArg(
            role=str(_require(arg, "role", line_no)),
            text=str(_require(arg, "text", line_no)),
            span=tuple(_require(arg, "span", line_no)),
        ))
    return SrlFrame(
        predicate_lemma=pred,
        predicate_char_span=tuple(span),
        args=tuple(args),
        sentence_ref=text_id,
    )


def load_parse_bundle(path: str | Path, parse_kind: str | None = None) -> DocumentParse:
    """Load and validate a line-delimited JSON parse bundle.

    ``parse_kind`` may force "amr" or "srl"; by default the kind is inferred
    from the records (a bundle mixing both kinds is rejected). Identical
    bytes always produce a structurally equal DocumentParse.
    """
    path = Path(path)
    if not path.exists():
        raise BundleError(f"bundle file not found: {path}")
    doc_id = ""
    sentences: list[SentenceRecord] = []
    parses: dict[str, list] = {}
    seen_kind: str | None = None
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise BundleError(f"line {line_no}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise BundleError(f"line {line_no}: record must be a JSON object")
            kind = record.get("kind")
            if kind == "comment":
                continue
            if kind == "sentence":
                rec_doc, sentence = _load_sentence(record, line_no)
                if rec_doc:
                    if doc_id and rec_doc != doc_id:
                        raise BundleError(
                            f"line {line_no}: doc_id {rec_doc!r} conflicts with {doc_id!r}")
                    doc_id = rec_doc
                sentences.append(sentence)
            elif kind == AMR:
                graph = _load_amr(record, line_no)
                parses.setdefault(graph.sentence_ref, []).append(graph)
                seen_kind = _merge_kind(seen_kind, AMR, line_no)
            elif kind == SRL:
                frame = _load_srl(record, line_no)
                parses.setdefault(frame.sentence_ref, []).append(frame)
                seen_kind = _merge_kind(seen_kind, SRL, line_no)
            else:
                raise BundleError(f"line {line_no}: unknown record kind {kind!r}")
    kind = parse_kind or seen_kind or AMR
    if seen_kind is not None and kind != seen_kind:
        raise BundleError(f"bundle holds {seen_kind} parses but {kind!r} was requested")
    sentences.sort(key=lambda s: (s.chunk_index, s.sent_index))
    parse = DocumentParse(doc_id=doc_id, sentences=sentences, parses=parses, parse_kind=kind)
    validate_document(parse)
    return parse


def _merge_kind(seen: str | None, new: str, line_no: int) -> str:
    if seen is not None and seen != new:
        raise BundleError(f"line {line_no}: bundle mixes {seen} and {new} parse records")
    return new
