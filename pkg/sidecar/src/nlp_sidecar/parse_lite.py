"""Clause-level semantic parsing without model weights.

A deterministic stand-in for the heavyweight parser toolchains: clauses
are split at coordination, each clause gets one predicate from a verb
lexicon, noun phrases are analyzed for possessives, quantifiers,
modifiers, and proper names, and repeated phrases share one variable
(reentrancy). Output is a PENMAN string (AMR side) or role-labeled
frames with character spans (SRL side).

Light-verb constructions are rewritten to their content predicate, e.g.
"gave a dose of X to Y" becomes a dosing event whose patient is Y and
substance is X.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_IRREGULAR_VERBS = {
    "put": "put", "made": "make", "gave": "give", "went": "go", "ran": "run",
    "took": "take", "bought": "buy", "ate": "eat", "lost": "lose",
    "shed": "shed", "flew": "fly", "came": "come", "left": "leave",
    "hid": "hide", "had": "have", "began": "begin", "sat": "sit",
    "found": "find", "shook": "shake", "became": "become", "thought": "think",
    "heard": "hear", "spoke": "speak", "saw": "see", "got": "get",
    "caught": "catch", "hung": "hang", "did": "do", "said": "say",
    "knew": "know", "felt": "feel", "wrote": "write", "slept": "sleep",
    "kept": "keep", "told": "tell", "stood": "stand", "held": "hold",
}

_BASE_VERBS = [
    "put", "make", "give", "go", "run", "take", "buy", "eat", "look", "meet",
    "jump", "chase", "wave", "call", "frighten", "rush", "forget", "lose",
    "overhear", "implore", "exert", "come", "intend", "pop", "wriggle",
    "leave", "hide", "have", "begin", "turn", "sneeze", "try", "upset",
    "tire", "sit", "rest", "tremble", "wander", "find", "lock", "squeeze",
    "carry", "ask", "shake", "cry", "become", "fill", "stare", "twitch",
    "think", "hear", "speak", "scutter", "climb", "peep", "see", "hoe",
    "slip", "stop", "get", "flop", "shut", "wonder", "do", "say", "live",
    "bake", "hang", "catch", "want", "publish", "write", "use", "copy",
    "plant", "feel", "gather", "dose", "answer", "happen", "arrive", "visit",
    "sleep", "keep", "tell", "stand", "hold", "walk", "smile", "laugh",
    "open", "close", "push", "pull", "drop", "pick", "cook", "drink",
]

_VERB_SENSES = {"run": "02", "go": "02", "get": "05", "jump": "03",
                "meet": "03", "lose": "02", "do": "02", "cry": "02"}


def _inflections(base: str) -> list[str]:
    forms = [base, base + "s", base + "es", base + "ing"]
    if base.endswith("e"):
        forms += [base + "d", base[:-1] + "ing"]
    elif base.endswith("y") and len(base) > 2 and base[-2] not in "aeiou":
        forms += [base[:-1] + "ied", base[:-1] + "ies"]
    else:
        forms += [base + "ed"]
        if len(base) >= 3 and base[-1] not in "aeiouwy" and base[-2] in "aeiou" \
                and base[-3] not in "aeiou":
            forms += [base + base[-1] + "ed", base + base[-1] + "ing"]
    return forms


def _build_verb_lexicon() -> dict[str, str]:
    lexicon: dict[str, str] = {}
    for base in _BASE_VERBS:
        for form in _inflections(base):
            lexicon.setdefault(form, base)
    lexicon.update(_IRREGULAR_VERBS)
    return lexicon


VERB_LEXICON = _build_verb_lexicon()

_CONNECTIVE_LEAD = {"and", "but", "then", "now", "first", "also", "presently",
                    "so", "or", "suddenly"}
_DETERMINERS = {"a", "an", "the", "this", "that", "these", "those"}
_QUANT_WORDS = {"some", "many", "few", "much", "all", "several", "no", "one",
                "two", "three", "four", "five", "six", "seven", "eight",
                "nine", "ten", "most", "more", "both", "every", "each"}
_PREPOSITIONS = {"in", "into", "through", "under", "underneath", "at", "on",
                 "upon", "over", "behind", "among", "amongst", "towards",
                 "toward", "with", "from", "by", "for", "of", "across",
                 "beyond", "down", "along", "near", "inside", "outside"}
_PARTICLES = {"up", "down", "out", "along", "away", "over", "about", "back",
              "off", "around"}
_KINSHIP = {"mother", "father", "cousin", "sister", "brother", "aunt",
            "uncle", "grandmother", "grandfather", "mom", "dad"}
_TITLES = {"Mr.", "Mrs.", "Ms.", "Dr."}
_IRREGULAR_NOUNS = {"clothes": "clothing", "mice": "mouse", "feet": "foot",
                    "teeth": "tooth", "children": "child"}
_PRONOUN_SUBJECTS = {"i", "he", "she", "it", "they", "we", "you"}

_LIGHT_VERB_OBJECTS = {
    ("give", "dose"): "dose",
    ("take", "bath"): "bathe",
    ("have", "look"): "look",
}


def _singular(noun: str) -> str:
    if noun in _IRREGULAR_NOUNS:
        return _IRREGULAR_NOUNS[noun]
    for suffix, replacement in (("ches", "ch"), ("shes", "sh"), ("sses", "ss"),
                                ("xes", "x"), ("ies", "y"), ("oes", "o")):
        if noun.endswith(suffix):
            return noun[: -len(suffix)] + replacement
    if noun.endswith("s") and not noun.endswith("ss") and len(noun) > 3:
        return noun[:-1]
    return noun


def _strip_punct(token: str) -> str:
    return token.strip(".,;:!?'\"“”‘’()")


@dataclass
class Np:
    """Analyzed noun phrase: head concept plus folded structure."""

    head: str
    name: list[str] = field(default_factory=list)   # proper-name tokens
    mods: list[str] = field(default_factory=list)
    quant: str | None = None
    owner: "Np | None" = None
    kin: str | None = None                          # kinship role of owner

    def registry_key(self) -> str:
        if self.name:
            core = [t.lower() for t in self.name]
        elif self.kin:
            core = [self.kin]
        else:
            core = list(self.mods) + [self.head]
        if self.owner:
            core.append(">" + self.owner.registry_key())
        return " ".join(core)


def _is_possessive(token: str) -> bool:
    return token.endswith(("'s", "’s")) or (token.endswith("s'") and len(token) > 2)


def analyze_np(text: str) -> Np | None:
    tokens = [_strip_punct(t) for t in text.split()]
    tokens = [t for t in tokens if t]
    if not tokens:
        return None
    # proper name (optionally titled): all tokens capitalized, no possessive
    if all(t[0].isupper() for t in tokens) and tokens[-1].lower() not in _KINSHIP \
            and not any(_is_possessive(t) for t in tokens):
        name = [t if t in _TITLES else t.rstrip(".") for t in tokens]
        return Np(head="person", name=name)
    quant = None
    while tokens and tokens[0].lower() in _DETERMINERS:
        tokens = tokens[1:]
    if tokens and tokens[0].lower() in _QUANT_WORDS:
        quant = tokens[0].lower()
        tokens = tokens[1:]
    if not tokens:
        return None
    owner = None
    for i, token in enumerate(tokens):
        if token.endswith("'s") or token.endswith("’s"):
            owner = analyze_np(" ".join(tokens[:i] + [token[:-2]]))
            tokens = tokens[i + 1:]
            break
        if token.endswith("s'") and len(token) > 2:
            owner = analyze_np(" ".join(tokens[:i] + [token[:-1]]))
            tokens = tokens[i + 1:]
            break
    if not tokens:
        return None
    while tokens and tokens[0].lower() in _QUANT_WORDS and quant is None:
        quant = tokens[0].lower()
        tokens = tokens[1:]
    if not tokens:
        return None
    head_raw = tokens[-1].lower()
    head = _singular(head_raw)
    mods = [t.lower() for t in tokens[:-1] if t.lower() not in _DETERMINERS]
    if head in _KINSHIP and owner is not None:
        return Np(head="person", mods=mods, quant=quant, owner=owner, kin=head)
    return Np(head=head, mods=mods, quant=quant, owner=owner)


@dataclass
class Clause:
    text: str
    offset: int                      # char offset in the sentence
    verb_token: str = ""
    verb_index: int = -1             # token index
    lemma: str = ""
    subject: str = ""
    obj: str = ""
    dest: str = ""                   # "to X" complement, without "to"
    dest_raw: str = ""               # with "to"
    location: str = ""
    location_raw: str = ""
    particles: list[str] = field(default_factory=list)


def _split_clauses(sentence: str) -> list[tuple[str, int]]:
    """Coordination split with character offsets; NP-coordination is kept
    together (the right side must contain a verb to split)."""
    pieces: list[tuple[str, int]] = []
    position = 0
    for part in re.split(r"(?<=[;:])\s+", sentence):
        offset = sentence.index(part, position)
        position = offset + len(part)
        pieces.append((part, offset))
    clauses: list[tuple[str, int]] = []
    for text, offset in pieces:
        start = 0
        for match in re.finditer(r",?\s+(?:and|but)\s+", text):
            right = text[match.end():]
            right_tokens = [_strip_punct(t).lower() for t in right.split()]
            left = text[start:match.start()]
            left_tokens = [_strip_punct(t).lower() for t in left.split()]
            if any(t in VERB_LEXICON for t in right_tokens) and \
                    any(t in VERB_LEXICON for t in left_tokens):
                if left.strip():
                    clauses.append((left, offset + start))
                start = match.end()
        tail = text[start:]
        if tail.strip():
            clauses.append((tail, offset + start))
    return clauses


def _analyze_clause(text: str, offset: int) -> Clause | None:
    clause = Clause(text=text, offset=offset)
    tokens = text.split()
    stripped = [_strip_punct(t).lower() for t in tokens]
    verb_index = -1
    for i, token in enumerate(stripped):
        if token in VERB_LEXICON and (i == 0 or stripped[i - 1] != "to"):
            verb_index = i
            break
    if verb_index < 0:
        return None
    clause.verb_index = verb_index
    clause.verb_token = _strip_punct(tokens[verb_index])
    clause.lemma = VERB_LEXICON[stripped[verb_index]]

    subject_tokens = tokens[:verb_index]
    while subject_tokens and _strip_punct(subject_tokens[0]).lower() in _CONNECTIVE_LEAD:
        subject_tokens = subject_tokens[1:]
    clause.subject = " ".join(subject_tokens)
    if _strip_punct(clause.subject).lower() in _PRONOUN_SUBJECTS:
        clause.subject = ""  # unresolved pronoun: treat as inherited

    post = tokens[verb_index + 1:]
    while post and _strip_punct(post[0]).lower() in _PARTICLES:
        clause.particles.append(_strip_punct(post[0]).lower())
        post = post[1:]
    post_text = " ".join(post)
    match = re.search(r"\bto\s+(.+)$", post_text)
    if match:
        complement_head = _strip_punct(match.group(1).split()[0]).lower()
        if complement_head not in VERB_LEXICON:  # "to bed" yes, "to put" no
            clause.dest = match.group(1)
            clause.dest_raw = post_text[match.start():]
            post_text = post_text[: match.start()].strip().rstrip(",")
    post_tokens = post_text.split()
    if post_tokens and _strip_punct(post_tokens[0]).lower() in _PREPOSITIONS:
        prep = _strip_punct(post_tokens[0]).lower()
        clause.location_raw = post_text
        clause.location = " ".join(post_tokens[1:]) if prep != "of" else ""
        if prep == "of":
            clause.obj = post_text
    else:
        clause.obj = post_text
    return clause


def parse_clauses(sentence: str) -> tuple[list[Clause], int]:
    """All analyzable clauses plus the count of unparseable fragments."""
    clauses: list[Clause] = []
    skipped = 0
    previous_subject = ""
    for text, offset in _split_clauses(sentence):
        clause = _analyze_clause(text, offset)
        if clause is None:
            skipped += 1
            continue
        if not clause.subject and previous_subject:
            clause.subject = previous_subject
        if clause.subject:
            previous_subject = clause.subject
        clauses.append(clause)
    return clauses, skipped


# ---------------------------------------------------------------------------
# PENMAN generation


class _VarAllocator:
    def __init__(self):
        self.used: dict[str, int] = {}

    def new(self, concept: str) -> str:
        letter = concept[0].lower() if concept and concept[0].isalpha() else "x"
        count = self.used.get(letter, 0) + 1
        self.used[letter] = count
        return letter if count == 1 else f"{letter}{count}"


class _PenmanBuilder:
    def __init__(self):
        self.vars = _VarAllocator()
        self.registry: dict[str, str] = {}   # NP registry key -> variable
        self.emitted: set[str] = set()

    def np_node(self, np: Np, indent: int) -> str:
        key = np.registry_key()
        if key in self.registry:
            return self.registry[key]
        pad = " " * (indent + 4)
        if getattr(np, "kin", None):
            var = self.vars.new("person")
            self.registry[key] = var
            owner = self.np_node(np.owner, indent + 8) if np.owner else None
            frame_var = self.vars.new("have-rel-role-91")
            kin_var = self.vars.new(np.kin)  # type: ignore[attr-defined]
            inner_pad = " " * (indent + 8)
            lines = [f"({var} / person",
                     f"{pad}:ARG0-of ({frame_var} / have-rel-role-91"]
            if owner:
                lines.append(f"{inner_pad}:ARG1 {owner}")
            lines.append(f"{inner_pad}:ARG2 ({kin_var} / {np.kin}))"  # type: ignore[attr-defined]
                         + ")")
            return "\n".join(lines)
        if np.name:
            var = self.vars.new("person")
            self.registry[key] = var
            name_var = self.vars.new("name")
            ops = " ".join(f':op{i + 1} "{part}"' for i, part in enumerate(np.name))
            return f"({var} / person\n{pad}:name ({name_var} / name {ops}))"
        var = self.vars.new(np.head)
        self.registry[key] = var
        parts = [f"({var} / {np.head}"]
        for mod in np.mods:
            mod_var = self.vars.new(mod)
            parts.append(f"\n{pad}:mod ({mod_var} / {mod})")
        if np.quant:
            quant = np.quant
            if quant.isdigit():
                parts.append(f"\n{pad}:quant {quant}")
            else:
                quant_var = self.vars.new(quant)
                parts.append(f"\n{pad}:quant ({quant_var} / {quant})")
        if np.owner:
            owner = self.np_node(np.owner, indent + 4)
            parts.append(f"\n{pad}:poss {owner}")
        parts.append(")")
        return "".join(parts)

    def _np_ref(self, text: str, indent: int) -> str | None:
        np = analyze_np(text)
        if np is None:
            return None
        return self.np_node(np, indent)

    def clause_node(self, clause: Clause, indent: int) -> str:
        lemma, obj, dest = clause.lemma, clause.obj, clause.dest
        # light-verb rewrite: the content noun becomes the predicate
        lvc_object = None
        lvc = re.match(r"(?:(?:a|an|the)\s+)?(\w+)\s+of\s+(.+)$", obj.strip(),
                       re.IGNORECASE) if obj else None
        if lvc and (lemma, lvc.group(1).lower()) in _LIGHT_VERB_OBJECTS:
            lemma = _LIGHT_VERB_OBJECTS[(lemma, lvc.group(1).lower())]
            lvc_object = lvc.group(2)
        sense = _VERB_SENSES.get(lemma, "01")
        frame = f"{lemma}-{sense}"
        var = self.vars.new(lemma)
        pad = " " * (indent + 4)
        parts = [f"({var} / {frame}"]
        if clause.subject:
            subject = self._np_ref(clause.subject, indent + 4)
            if subject:
                parts.append(f"\n{pad}:ARG0 {subject}")
        if lvc_object is not None:
            patient = self._np_ref(dest, indent + 4) if dest else None
            if patient:
                parts.append(f"\n{pad}:ARG1 {patient}")
            substance = self._np_ref(lvc_object, indent + 4)
            if substance:
                parts.append(f"\n{pad}:ARG2 {substance}")
        else:
            if obj:
                obj_ref = self._np_ref(obj, indent + 4)
                if obj_ref:
                    parts.append(f"\n{pad}:ARG1 {obj_ref}")
            if dest:
                dest_ref = self._np_ref(dest, indent + 4)
                if dest_ref:
                    parts.append(f"\n{pad}:ARG2 {dest_ref}")
        if clause.location:
            loc = self._np_ref(clause.location, indent + 4)
            if loc:
                parts.append(f"\n{pad}:location {loc}")
        for particle in clause.particles:
            particle_var = self.vars.new(particle)
            parts.append(f"\n{pad}:direction ({particle_var} / {particle})")
        parts.append(")")
        return "".join(parts)


def sentence_to_penman(sentence: str) -> tuple[str | None, int]:
    """PENMAN for one sentence, or None when no clause parses."""
    clauses, skipped = parse_clauses(sentence)
    if not clauses:
        return None, skipped
    builder = _PenmanBuilder()
    builder.vars.used["a"] = 1  # reserve "a" for the coordination root
    if len(clauses) == 1:
        return builder.clause_node(clauses[0], 0), skipped
    parts = ["(a / and"]
    for i, clause in enumerate(clauses, start=1):
        parts.append(f"\n    :op{i} {builder.clause_node(clause, 4)}")
    parts.append(")")
    return "".join(parts), skipped


# ---------------------------------------------------------------------------
# SRL generation


def _find_span(sentence: str, fragment: str, start_at: int) -> tuple[int, int] | None:
    fragment = fragment.strip().rstrip(".,;:!?'\"")
    if not fragment:
        return None
    index = sentence.find(fragment, start_at)
    if index < 0:
        index = sentence.find(fragment)
    if index < 0:
        return None
    return index, index + len(fragment)


def sentence_to_frames(sentence: str) -> tuple[list[dict], int]:
    """SRL-style frames with character spans inside the sentence."""
    clauses, skipped = parse_clauses(sentence)
    frames: list[dict] = []
    for clause in clauses:
        pred_span = _find_span(sentence, clause.verb_token, clause.offset)
        if pred_span is None:
            skipped += 1
            continue
        args = []
        for role, fragment in (("A0", clause.subject), ("A1", clause.obj),
                               ("A2", clause.dest_raw),
                               ("AM-LOC", clause.location_raw)):
            span = _find_span(sentence, fragment, clause.offset)
            if span is not None:
                args.append({"role": role,
                             "text": sentence[span[0]:span[1]],
                             "span": [span[0], span[1]]})
        frames.append({
            "predicate": clause.verb_token,
            "pred_span": [pred_span[0], pred_span[1]],
            "args": args,
        })
    return frames, skipped
