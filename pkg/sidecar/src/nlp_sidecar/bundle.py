"""Parse-bundle production: chunk, segment, resolve, parse, emit JSONL.

The emitted file follows the engine's bundle contract exactly: a leading
``comment`` provenance record, one ``sentence`` record per sentence with
the (chunk, sentence, original, normalized, coref) tuple fields, and one
``amr`` or ``srl`` record per parsed sentence. Unparseable sentences keep
their sentence record and are counted in the returned stats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .chunking import split_chunks
from .config import SidecarConfig, SidecarError
from .coref import CorefState
from .parse_lite import sentence_to_frames, sentence_to_penman
from .segment import split_sentences


@dataclass
class BundleStats:
    sentences: int = 0
    parses: int = 0
    skipped: int = 0
    chunks: int = 0


def _provenance(config: SidecarConfig) -> dict:
    return {
        "kind": "comment",
        "generator": "nlp-sidecar",
        "version": __version__,
        "backend": "lite",
        "chunk_size": config.chunk_size,
        "overlap": config.overlap,
        "parse_kinds": list(config.parse_kinds),
    }


def make_bundle(config: SidecarConfig) -> BundleStats:
    """Process the input document and write the bundle file."""
    config.validate()
    input_path = Path(config.input_path)
    if not input_path.exists():
        raise SidecarError(f"input document not found: {input_path}")
    text = input_path.read_text(encoding="utf-8")

    stats = BundleStats()
    sentence_records: list[dict] = []
    parse_records: list[dict] = []
    chunks = split_chunks(text, config.chunk_size, config.overlap)
    stats.chunks = len(chunks)
    for chunk_index, chunk in enumerate(chunks):
        coref = CorefState()
        for sent_index, sentence in enumerate(split_sentences(chunk)):
            resolved = coref.resolve(sentence)
            text_id = f"text_{chunk_index}-{sent_index}"
            sentence_records.append({
                "kind": "sentence",
                "doc_id": config.doc_id,
                "chunk_index": chunk_index,
                "sent_index": sent_index,
                "original": sentence,
                "normalized": " ".join(sentence.split()),
                "coref_resolved": resolved,
            })
            stats.sentences += 1
            if "amr" in config.parse_kinds:
                penman, _ = sentence_to_penman(resolved)
                if penman is None:
                    stats.skipped += 1
                else:
                    parse_records.append(
                        {"kind": "amr", "text_id": text_id, "penman": penman})
                    stats.parses += 1
            if "srl" in config.parse_kinds:
                frames, _ = sentence_to_frames(resolved)
                if not frames and "amr" not in config.parse_kinds:
                    stats.skipped += 1
                for frame in frames:
                    parse_records.append({"kind": "srl", "text_id": text_id, **frame})
                    stats.parses += 1

    out_path = Path(config.out_path)
    with out_path.open("w", encoding="utf-8") as fh:
        if stats.sentences or stats.parses:
            fh.write(json.dumps(_provenance(config), ensure_ascii=False) + "\n")
        for record in sentence_records + parse_records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return stats
