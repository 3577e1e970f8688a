"""PENMAN s-expression parsing and serialization for AMR graphs.

A PENMAN graph looks like::

    (g / give-01
        :ARG0 (m / mother)
        :ARG1 (t / tea :mod (c / camomile))
        :ARG2 (p / person :name (n / name :op1 "Peter")))

Variables introduced with ``var / concept`` may be referenced again later
(bare, or parenthesized without a concept); such reentrant references denote
the same node. Quoted strings, numbers, and other bare symbols that never
receive a concept declaration are attribute constants, not nodes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import PenmanParseError

Relation = tuple[str, str, str]

_SYMBOL_RE = re.compile(r'[^\s()/:"]+')


@dataclass
class AmrGraph:
    """One rooted AMR graph.

    ``instances`` maps each variable to its concept in declaration order.
    ``relations`` holds (source_var, role, target_var) triples; a variable
    appearing as the target of several relations is a single reentrant node.
    ``attributes`` holds (var, role, constant) triples where the constant is
    the verbatim lexeme (quoted strings keep their quotes).
    """

    root: str
    instances: dict[str, str] = field(default_factory=dict)
    relations: list[Relation] = field(default_factory=list)
    attributes: list[Relation] = field(default_factory=list)
    sentence_ref: str = ""

    def variables(self) -> set[str]:
        return set(self.instances)

    def concept(self, var: str) -> str:
        return self.instances[var]

    def outgoing(self, var: str) -> list[Relation]:
        return [r for r in self.relations if r[0] == var]

    def attributes_of(self, var: str) -> list[Relation]:
        return [a for a in self.attributes if a[0] == var]


@dataclass
class _Token:
    kind: str  # lparen rparen slash role string symbol
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", "(", line, col))
            i += 1
            col += 1
        elif ch == ")":
            tokens.append(_Token("rparen", ")", line, col))
            i += 1
            col += 1
        elif ch == "/":
            tokens.append(_Token("slash", "/", line, col))
            i += 1
            col += 1
        elif ch == '"':
            start_line, start_col = line, col
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                if text[j] == "\n":
                    raise PenmanParseError("unterminated string", start_line, start_col)
                j += 1
            if j >= n:
                raise PenmanParseError("unterminated string", start_line, start_col)
            lexeme = text[i : j + 1]
            tokens.append(_Token("string", lexeme, start_line, start_col))
            col += j + 1 - i
            i = j + 1
        elif ch == ":":
            m = _SYMBOL_RE.match(text, i + 1)
            if not m:
                raise PenmanParseError("empty role name after ':'", line, col)
            tokens.append(_Token("role", ":" + m.group(0), line, col))
            col += m.end() - i
            i = m.end()
        else:
            m = _SYMBOL_RE.match(text, i)
            if not m:
                raise PenmanParseError(f"unexpected character {ch!r}", line, col)
            tokens.append(_Token("symbol", m.group(0), line, col))
            col += m.end() - i
            i = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.instances: dict[str, str] = {}
        # Raw (source, role, target_symbol, is_node_ref) triples; bare symbols
        # are classified as reentrancies vs constants once all declarations
        # are known.
        self.raw: list[tuple[str, str, _Token, bool]] = []

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expected: str | None = None) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise PenmanParseError("unexpected end of input", last.line, last.col + len(last.text))
        if expected is not None and tok.kind != expected:
            raise PenmanParseError(f"expected {expected}, found {tok.text!r}", tok.line, tok.col)
        self.pos += 1
        return tok

    def parse(self) -> AmrGraph:
        opening = self._peek()
        if opening is None:
            raise PenmanParseError("empty input", 1, 1)
        root, declared = self._parse_node()
        if not declared:
            raise PenmanParseError(f"root node {root!r} must declare a concept", opening.line, opening.col)
        trailing = self._peek()
        if trailing is not None:
            raise PenmanParseError(f"trailing input after graph: {trailing.text!r}", trailing.line, trailing.col)
        return self._finish(root)

    def _parse_node(self) -> tuple[str, bool]:
        """Parse '(' var [/ concept] relation* ')'. Returns (var, has_concept)."""
        self._next("lparen")
        var_tok = self._next("symbol")
        var = var_tok.text
        declared = False
        tok = self._peek()
        if tok is not None and tok.kind == "slash":
            self._next("slash")
            concept_tok = self._next()
            if concept_tok.kind not in ("symbol", "string"):
                raise PenmanParseError(
                    f"expected concept after '/', found {concept_tok.text!r}",
                    concept_tok.line,
                    concept_tok.col,
                )
            prior = self.instances.get(var)
            if prior is not None and prior != concept_tok.text:
                raise PenmanParseError(
                    f"variable {var!r} redefined with conflicting concept "
                    f"{concept_tok.text!r} (was {prior!r})",
                    concept_tok.line,
                    concept_tok.col,
                )
            self.instances[var] = concept_tok.text
            declared = True
        else:
            # Bare "(x)" is a node reference; validity is checked at the end.
            self.raw.append((var, "", var_tok, True))
        while True:
            tok = self._peek()
            if tok is None:
                raise PenmanParseError("unbalanced parentheses: missing ')'", var_tok.line, var_tok.col)
            if tok.kind == "rparen":
                self._next()
                return var, declared
            if tok.kind != "role":
                raise PenmanParseError(f"expected role or ')', found {tok.text!r}", tok.line, tok.col)
            role_tok = self._next("role")
            target = self._peek()
            if target is None:
                raise PenmanParseError("role without target", role_tok.line, role_tok.col)
            if target.kind == "lparen":
                child, _ = self._parse_node()
                self.raw.append((var, role_tok.text, _Token("node", child, target.line, target.col), True))
            elif target.kind in ("symbol", "string"):
                self._next()
                self.raw.append((var, role_tok.text, target, False))
            else:
                raise PenmanParseError(f"invalid role target {target.text!r}", target.line, target.col)
        raise AssertionError("unreachable")

    def _finish(self, root: str) -> AmrGraph:
        graph = AmrGraph(root=root, instances=self.instances)
        for source, role, target_tok, is_node in self.raw:
            if role == "":
                # Placeholder emitted for bare "(x)" references.
                if target_tok.text not in self.instances:
                    raise PenmanParseError(
                        f"reference to undeclared variable {target_tok.text!r}",
                        target_tok.line,
                        target_tok.col,
                    )
                continue
            if is_node or (target_tok.kind == "symbol" and target_tok.text in self.instances):
                if target_tok.text not in self.instances:
                    raise PenmanParseError(
                        f"relation {role} targets undeclared variable {target_tok.text!r}",
                        target_tok.line,
                        target_tok.col,
                    )
                graph.relations.append((source, role, target_tok.text))
            else:
                graph.attributes.append((source, role, target_tok.text))
        self._check_acyclic(graph)
        return graph

    @staticmethod
    def _check_acyclic(graph: AmrGraph) -> None:
        succ: dict[str, list[str]] = {}
        for s, _, t in graph.relations:
            succ.setdefault(s, []).append(t)
        WHITE, GREY, BLACK = 0, 1, 2
        state = {v: WHITE for v in graph.instances}
        def visit(v: str) -> None:
            state[v] = GREY
            for w in succ.get(v, ()):
                if state[w] == GREY:
                    raise PenmanParseError(f"cycle through variable {w!r}", 1, 1)
                if state[w] == WHITE:
                    visit(w)
            state[v] = BLACK
        for v in graph.instances:
            if state[v] == WHITE:
                visit(v)


def parse_penman(text: str) -> AmrGraph:
    """Parse a single PENMAN s-expression into an :class:`AmrGraph`.

    Raises :class:`PenmanParseError` with line/column information on
    unbalanced parentheses, conflicting variable redefinitions,
    parenthesized references to undeclared variables, relation cycles,
    or trailing input.
    """
    return _Parser(_tokenize(text)).parse()


def encode_penman(graph: AmrGraph, indent: int = 4) -> str:
    """Serialize a graph back to PENMAN.

    Each variable's concept is printed at its first visit in a depth-first
    walk from the root; later mentions are bare reentrant references.
    Re-parsing the output yields a graph isomorphic to the input.
    """
    out_rel: dict[str, list[Relation]] = {}
    for rel in graph.relations:
        out_rel.setdefault(rel[0], []).append(rel)
    out_attr: dict[str, list[Relation]] = {}
    for att in graph.attributes:
        out_attr.setdefault(att[0], []).append(att)
    printed: set[str] = set()

    def emit(var: str, depth: int) -> str:
        if var in printed:
            return var
        printed.add(var)
        pad = " " * (indent * (depth + 1))
        parts = [f"({var} / {graph.instances[var]}"]
        for _, role, const in out_attr.get(var, ()):
            parts.append(f"\n{pad}{role} {const}")
        for _, role, target in out_rel.get(var, ()):
            parts.append(f"\n{pad}{role} {emit(target, depth + 1)}")
        parts.append(")")
        return "".join(parts)

    body = emit(graph.root, 0)
    # Relations out of unreachable components would be silently dropped;
    # parsed graphs are always root-connected, so just assert.
    missing = graph.variables() - printed
    if missing:
        raise ValueError(f"graph has variables unreachable from root: {sorted(missing)}")
    return body
