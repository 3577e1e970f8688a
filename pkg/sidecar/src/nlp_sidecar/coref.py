"""Naive coreference substitution.

Tracks the most recent person mention and the most recent non-person
noun phrase, and rewrites third-person pronouns to those antecedents.
Crude compared to a learned resolver, but deterministic and good enough
to ground pronoun-heavy narrative sentences to named participants.
"""

from __future__ import annotations

from .parse_lite import VERB_LEXICON

_TITLES = {"Mr.", "Mrs.", "Ms.", "Dr.", "Old"}
_NAME_STOP = {
    "The", "A", "An", "And", "But", "Or", "Then", "First", "Now", "Also",
    "Presently", "After", "Before", "Once", "Upon", "I", "It", "There",
    "What", "Where", "When", "Who", "Why", "How", "This", "That", "These",
    "Those", "If", "As", "So", "Not", "One", "He", "She", "They", "His",
    "Her", "Him", "Them", "Their", "We", "You", "Your", "My", "Title",
    "Author", "Release",
}

_SUBJECT_PRONOUNS = {"he", "she", "they"}
_OBJECT_PRONOUNS = {"him", "them"}
_POSSESSIVE_PRONOUNS = {"his", "their"}
# "her" and "it(s)" are ambiguous; handled separately.


def _clean(token: str) -> str:
    return token.strip("'\"“”‘’(),;:!?")


def _is_name_token(word: str) -> bool:
    if word in _TITLES:
        return True
    if not word or not word[0].isupper() or not word.isalpha():
        return False
    if len(word) > 1 and word.isupper():  # all-caps headings, not names
        return False
    return word not in _NAME_STOP and word.lower() not in VERB_LEXICON


def find_person_mentions(sentence: str) -> list[str]:
    """Capitalized name sequences ("Mr. McGregor", "Peter"), left to right."""
    tokens = sentence.split()
    mentions: list[str] = []
    i = 0
    while i < len(tokens):
        word = _clean(tokens[i])
        if _is_name_token(word):
            parts = [word if word in _TITLES else word.rstrip(".")]
            j = i + 1
            while j < len(tokens):
                nxt = _clean(tokens[j])
                if _is_name_token(nxt):
                    parts.append(nxt if nxt in _TITLES else nxt.rstrip("."))
                    j += 1
                else:
                    break
            mentions.append(" ".join(parts))
            i = j
        else:
            i += 1
    return mentions


def _possessive(name: str) -> str:
    return name + ("'" if name.endswith("s") else "'s")


class CorefState:
    """Carries antecedents across the sentences of one chunk."""

    def __init__(self):
        self.person: str | None = None

    def resolve(self, sentence: str) -> str:
        mentions = find_person_mentions(sentence)
        # a named mention earlier in the sentence may bind its own pronouns
        active = mentions[0] if mentions else self.person
        out: list[str] = []
        for token in sentence.split():
            core = token.strip(".,;:!?'\"“”‘’()")
            lower = core.lower()
            replacement = None
            if active:
                if lower in _SUBJECT_PRONOUNS or lower in _OBJECT_PRONOUNS:
                    replacement = active
                elif lower in _POSSESSIVE_PRONOUNS or lower == "her":
                    replacement = _possessive(active)
                elif lower == "himself" or lower == "herself":
                    replacement = active
            if replacement and core:
                start = token.index(core)
                token = token[:start] + replacement + token[start + len(core):]
            out.append(token)
        if mentions:
            self.person = mentions[0]
        return " ".join(out)
