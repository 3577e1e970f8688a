"""Recursive text splitting into token-bounded chunks.

Splits prefer paragraph boundaries, then line boundaries, then sentence
punctuation, then single tokens, so a chunk is always at most
``chunk_size`` whitespace tokens. Zero overlap by default; a positive
``overlap`` repeats that many trailing tokens at the start of the next
chunk.
"""

from __future__ import annotations

import re

_SEPARATORS = ["\n\n", "\n", ". "]


def token_count(text: str) -> int:
    return len(text.split())


def _split_recursive(text: str, chunk_size: int, separators: list[str]) -> list[str]:
    if token_count(text) <= chunk_size:
        return [text] if text.strip() else []
    if not separators:
        tokens = text.split()
        return [" ".join(tokens[i:i + chunk_size])
                for i in range(0, len(tokens), chunk_size)]
    sep, rest = separators[0], separators[1:]
    parts = [p for p in text.split(sep) if p.strip()]
    if len(parts) <= 1:
        return _split_recursive(text, chunk_size, rest)
    pieces: list[str] = []
    for part in parts:
        pieces.extend(_split_recursive(part, chunk_size, rest))
    # greedily re-merge adjacent pieces up to the budget
    merged: list[str] = []
    current = ""
    for piece in pieces:
        candidate = f"{current}\n\n{piece}" if current else piece
        if current and token_count(candidate) > chunk_size:
            merged.append(current)
            current = piece
        else:
            current = candidate
    if current:
        merged.append(current)
    return merged


def split_chunks(text: str, chunk_size: int = 5000, overlap: int = 0) -> list[str]:
    """Token-bounded chunks in document order."""
    text = re.sub(r"\r\n?", "\n", text)
    chunks = _split_recursive(text, chunk_size, _SEPARATORS)
    if overlap and len(chunks) > 1:
        overlapped = [chunks[0]]
        for previous, chunk in zip(chunks, chunks[1:]):
            tail = " ".join(previous.split()[-overlap:])
            overlapped.append(f"{tail} {chunk}")
        chunks = overlapped
    return chunks
