"""Rule-based sentence segmentation.

Splits on sentence-final punctuation followed by whitespace and an
upper-case or quote opener, protecting common abbreviations and initials.
Deterministic; used when no model pipeline is available.
"""

from __future__ import annotations

import re

_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "st", "co", "inc", "ltd", "jr", "sr", "prof",
    "vs", "etc", "e.g", "i.e", "no",
}

_BOUNDARY = re.compile(r"([.!?]+['\"’”]?)(\s+)(?=['\"‘“(]?[A-Z0-9])")


def _is_abbreviation(text: str, dot_index: int) -> bool:
    start = dot_index
    while start > 0 and (text[start - 1].isalpha() or text[start - 1] == "."):
        start -= 1
    word = text[start:dot_index].lower().rstrip(".")
    if not word:
        return False
    if word in _ABBREVIATIONS:
        return True
    return len(word) == 1 and word.isalpha()  # initials like "B. Potter"


def split_sentences(text: str) -> list[str]:
    text = " ".join(text.split())
    if not text:
        return []
    sentences: list[str] = []
    start = 0
    for match in _BOUNDARY.finditer(text):
        punct_start = match.start(1)
        if text[punct_start] == "." and _is_abbreviation(text, punct_start):
            continue
        end = match.end(1)
        sentence = text[start:end].strip()
        if sentence:
            sentences.append(sentence)
        start = match.end(2)
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences
