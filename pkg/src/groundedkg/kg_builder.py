"""Grounded knowledge-graph construction from semantic parses.

Entity and action nodes are extracted per sentence and merged into one
document graph. Every node and edge records the ids of the source
sentences it came from, so any graph element can be traced back to
verifiable text.

Construction rules, AMR side:

- concepts with a PropBank sense suffix ("give-01") become action nodes,
  one node per occurrence with a globally increasing suffix;
- relational ``*-91`` frames ("have-rel-role-91") are not events: they turn
  into role descriptors on the participating entity ("Peter's mother");
- modifier, quantifier, and name sub-structure folds into entity mention
  texts ("camomile tea", "a dose of camomile tea") instead of spawning
  nodes;
- a variable referenced from several relations is one node (reentrancy),
  and entities with the same case-folded label merge across sentences;
- relations between an action and a kept entity become role-labeled edges
  (ARG roles rendered "A0".."A5", other roles kept verbatim); the actions
  of each sentence are chained with "next" edges in text order.

SRL side: each predicate is an action occurrence, each argument span an
entity whose label is the argument text verbatim (so near-duplicate
mentions stay distinct nodes), with the same edge and chaining rules.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import GraphError
from .parse_ingest import AMR, SRL, DocumentParse, SentenceRecord, SrlFrame
from .penman import AmrGraph

ENTITY = "entity"
ACTION = "action"
ACTION_ENTITY = "action-entity"
ACTION_ACTION = "action-action"
NEXT = "next"

_SENSE_RE = re.compile(r"^(.+?)-(\d{2,3})$")
_ARG_ROLE_RE = re.compile(r"^ARG(\d)$")

# Structural concepts that never become nodes; their :op children are
# processed in their place.
_CONNECTIVES = {
    "and", "or", "either", "neither", "multi-sentence", "amr-unknown",
    "amr-choice", "after", "before", "until", "since",
}

# Roles whose target is absorbed into the parent's mention text.
_FOLD_ROLES = {"mod", "quant", "name", "unit", "degree", "age", "ord", "value"}

# Frames that assign a role label to their ARG0 participant.
_ROLE_FRAMES = {"have-rel-role-91", "have-org-role-91"}

_DETERMINER_QUANTS = {
    "some", "all", "many", "much", "few", "several", "most", "more", "no",
    "any", "each", "every", "both", "another", "enough",
}


@dataclass
class KgNode:
    node_id: str
    label: str
    texts: list[str]
    node_type: str
    grounded_texts: list[str]


@dataclass
class KgEdge:
    source_node: str
    target_node: str
    edge_role: str
    edge_type: str
    grounded_texts: list[str]


@dataclass
class GroundedKg:
    doc_id: str
    nodes: dict[str, KgNode]
    edges: list[KgEdge]
    sentence_table: dict[str, SentenceRecord]

    def adjacency(self) -> dict[str, list[str]]:
        """Undirected neighbor lists, sorted, self-loops excluded."""
        adj: dict[str, set[str]] = {node_id: set() for node_id in self.nodes}
        for edge in self.edges:
            if edge.source_node != edge.target_node:
                adj[edge.source_node].add(edge.target_node)
                adj[edge.target_node].add(edge.source_node)
        return {node_id: sorted(neigh) for node_id, neigh in adj.items()}


def validate_graph(kg: GroundedKg) -> None:
    """Enforce total grounding and referential integrity."""
    for node in kg.nodes.values():
        if not node.grounded_texts:
            raise GraphError(f"node {node.node_id} has no grounded texts")
        for text_id in node.grounded_texts:
            if text_id not in kg.sentence_table:
                raise GraphError(f"node {node.node_id} grounded to unknown sentence {text_id}")
        if node.node_type not in (ENTITY, ACTION):
            raise GraphError(f"node {node.node_id} has bad type {node.node_type!r}")
    for edge in kg.edges:
        if edge.source_node not in kg.nodes or edge.target_node not in kg.nodes:
            raise GraphError(
                f"edge {edge.edge_role} ({edge.source_node} -> {edge.target_node}) "
                f"has a missing endpoint")
        if not edge.grounded_texts:
            raise GraphError(f"edge {edge.source_node} -> {edge.target_node} has no grounded texts")
        for text_id in edge.grounded_texts:
            if text_id not in kg.sentence_table:
                raise GraphError(f"edge grounded to unknown sentence {text_id}")
        src = kg.nodes[edge.source_node]
        tgt = kg.nodes[edge.target_node]
        if edge.edge_type == ACTION_ACTION:
            if src.node_type != ACTION or tgt.node_type != ACTION or edge.edge_role != NEXT:
                raise GraphError(f"bad action-action edge {edge.source_node} -> {edge.target_node}")
        elif edge.edge_type == ACTION_ENTITY:
            if {src.node_type, tgt.node_type} != {ACTION, ENTITY}:
                raise GraphError(f"bad action-entity edge {edge.source_node} -> {edge.target_node}")
        else:
            raise GraphError(f"unknown edge type {edge.edge_type!r}")


def _merge_key(label: str) -> str:
    return " ".join(label.casefold().split())


class _GraphAccumulator:
    """Single-writer reduction: per-sentence extractions merge here."""

    def __init__(self, doc_id: str, sentence_table: dict[str, SentenceRecord]):
        self.kg = GroundedKg(doc_id=doc_id, nodes={}, edges=[], sentence_table=sentence_table)
        self.action_count = 0

    def add_entity(self, label: str, texts: list[str], text_id: str) -> str:
        label = " ".join(label.split())
        if not label:
            raise GraphError(f"empty entity label extracted from {text_id}")
        node_id = _merge_key(label)
        node = self.kg.nodes.get(node_id)
        if node is None:
            node = KgNode(node_id=node_id, label=label, texts=[], node_type=ENTITY,
                          grounded_texts=[])
            self.kg.nodes[node_id] = node
        elif node.node_type != ENTITY:
            raise GraphError(f"entity label {label!r} collides with node {node_id}")
        for text in texts:
            if text and text not in node.texts:
                node.texts.append(text)
        node.grounded_texts.append(text_id)
        return node_id

    def add_action(self, label: str, texts: list[str], text_id: str) -> str:
        if not label:
            raise GraphError(f"empty action label extracted from {text_id}")
        self.action_count += 1
        node_id = f"{label}_{self.action_count}"
        if node_id in self.kg.nodes:
            raise GraphError(f"duplicate node id {node_id}")
        self.kg.nodes[node_id] = KgNode(
            node_id=node_id, label=label, texts=list(dict.fromkeys(t for t in texts if t)),
            node_type=ACTION, grounded_texts=[text_id])
        return node_id

    def add_edge(self, source: str, target: str, role: str, edge_type: str, text_id: str) -> None:
        self.kg.edges.append(KgEdge(
            source_node=source, target_node=target, edge_role=role,
            edge_type=edge_type, grounded_texts=[text_id]))

    def chain_actions(self, action_ids: list[str], text_id: str) -> None:
        for left, right in zip(action_ids, action_ids[1:]):
            self.add_edge(left, right, NEXT, ACTION_ACTION, text_id)

    def finish(self) -> GroundedKg:
        for node in self.kg.nodes.values():
            node.texts.sort(key=lambda t: (-len(t), t))
        validate_graph(self.kg)
        return self.kg


# ---------------------------------------------------------------------------
# AMR extraction


def _sense_lemma(concept: str) -> str | None:
    m = _SENSE_RE.match(concept)
    return m.group(1) if m else None


def _is_relational_frame(concept: str) -> bool:
    return concept.endswith("-91")


def _is_action_concept(concept: str) -> bool:
    return _sense_lemma(concept) is not None and not _is_relational_frame(concept)


def _strip_quotes(lexeme: str) -> str:
    if len(lexeme) >= 2 and lexeme.startswith('"') and lexeme.endswith('"'):
        return lexeme[1:-1]
    return lexeme


def _op_index(role: str) -> int | None:
    if role.startswith("op") and role[2:].isdigit():
        return int(role[2:])
    return None


class _AmrExtractor:
    """Classifies one AMR graph's variables and renders entity mentions."""

    def __init__(self, graph: AmrGraph):
        self.g = graph
        self.out: dict[str, list[tuple[str, str, bool]]] = {}  # var -> [(role, target, inverted)]
        for s, raw_role, t in graph.relations:
            role = raw_role[1:]
            if role.endswith("-of"):
                self.out.setdefault(t, []).append((role[:-3], s, True))
            else:
                self.out.setdefault(s, []).append((role, t, False))
        self.attrs: dict[str, list[tuple[str, str]]] = {}
        for v, raw_role, const in graph.attributes:
            self.attrs.setdefault(v, []).append((raw_role[1:], const))
        self.kind = {v: self._classify(v) for v in graph.instances}
        self._mention_cache: dict[str, str] = {}
        self._labeling: set[str] = set()

    def _classify(self, var: str) -> str:
        concept = self.g.instances[var]
        if _is_action_concept(concept):
            return "action"
        if _is_relational_frame(concept):
            return "relational"
        if concept in _CONNECTIVES:
            return "connective"
        return "entity"

    def _children(self, var: str, role: str) -> list[str]:
        return [t for r, t, _ in self.out.get(var, ()) if r == role]

    def folded_only(self, var: str) -> bool:
        """True when the variable is reachable only through folding roles."""
        if self.kind[var] != "entity":
            return False
        incoming: list[str] = []
        for s, raw_role, t in self.g.relations:
            role = raw_role[1:]
            if role.endswith("-of"):
                s, t, role = t, s, role[:-3]
            if t != var:
                continue
            if role in _FOLD_ROLES:
                incoming.append(role)
            elif role == "ARG2" and self.g.instances.get(s) in _ROLE_FRAMES:
                incoming.append(role)
            elif _op_index(role) is not None and self.kind[s] != "connective":
                incoming.append(role)
            else:
                return False
        return bool(incoming)

    def name_string(self, var: str) -> str | None:
        for name_var in self._children(var, "name"):
            ops = [(idx, _strip_quotes(const))
                   for role, const in self.attrs.get(name_var, ())
                   if (idx := _op_index(role)) is not None]
            if ops:
                return " ".join(text for _, text in sorted(ops))
        return None

    def role_descriptor(self, var: str) -> tuple[str, str | None] | None:
        """("mother", "Peter") when var participates in a role frame as ARG0."""
        for frame, kind in self.kind.items():
            if kind != "relational" or self.g.instances[frame] not in _ROLE_FRAMES:
                continue
            if var not in self._children(frame, "ARG0"):
                continue
            role_concepts = [self.g.instances[t] for t in self._children(frame, "ARG2")]
            role_concepts += [_strip_quotes(c) for r, c in self.attrs.get(frame, ()) if r == "ARG2"]
            others = [self.entity_label(t) for t in self._children(frame, "ARG1")
                      if self.kind.get(t) == "entity"]
            if role_concepts:
                return role_concepts[0], (others[0] if others else None)
        return None

    def entity_label(self, var: str) -> str:
        name = self.name_string(var)
        if name:
            return name
        if var not in self._labeling:  # mutual role frames must not recurse
            self._labeling.add(var)
            try:
                descriptor = self.role_descriptor(var)
            finally:
                self._labeling.discard(var)
            if descriptor:
                return descriptor[0]
        return self.g.instances[var]

    def _mention(self, var: str) -> str:
        """Composed surface mention: mods and simple op children, no quantifier."""
        cached = self._mention_cache.get(var)
        if cached is not None:
            return cached
        self._mention_cache[var] = self.g.instances[var]  # cycle guard for odd graphs
        base = self.entity_label(var)
        mods = [self._mention(t) for r, t, _ in self.out.get(var, ())
                if r == "mod" and self.kind.get(t) != "action"]
        mods += [_strip_quotes(c) for r, c in self.attrs.get(var, ()) if r == "mod"]
        mention = " ".join(mods + [base]) if mods else base
        self._mention_cache[var] = mention
        return mention

    def entity_texts(self, var: str) -> list[str]:
        """Mention variants for one occurrence, cumulative from bare to fullest."""
        variants: list[str] = []
        base = self.entity_label(var)
        mention = self._mention(var)
        if mention != base:
            variants.append(mention)
        for role, target, _ in self.out.get(var, ()):
            if role == "quant" and self.kind.get(target) == "entity":
                q = self.g.instances[target]
                if q in _DETERMINER_QUANTS:
                    variants.append(f"{q} {mention}")
                else:
                    variants.append(f"a {q} of {mention}")
            elif role == "poss" and self.kind.get(target) == "entity":
                variants.append(f"{self.entity_label(target)}'s {mention}")
        for role, const in self.attrs.get(var, ()):
            if role == "quant":
                variants.append(f"{_strip_quotes(const)} {mention}")
        descriptor = self.role_descriptor(var)
        if descriptor and descriptor[1]:
            variants.append(f"{descriptor[1]}'s {descriptor[0]}")
        return variants

    def action_texts(self, var: str) -> list[str]:
        concept = self.g.instances[var]
        lemma = _sense_lemma(concept) or concept
        variants = [lemma]
        for role, target, _ in self.out.get(var, ()):
            if role == "direction" and self.kind.get(target) == "entity" and not self.out.get(target):
                variants.append(f"{lemma} {self.g.instances[target]}")
        for role, const in self.attrs.get(var, ()):
            if role == "polarity" and const == "-":
                variants.append(f"not {lemma}")
        return variants

    def expand_entities(self, var: str) -> list[str]:
        """Resolve a relation target to entity variables, looking through connectives."""
        kind = self.kind.get(var)
        if kind == "entity":
            return [var]
        if kind == "connective":
            found: list[str] = []
            for role, target, _ in self.out.get(var, ()):
                if _op_index(role) is not None:
                    found.extend(self.expand_entities(target))
            return found
        return []

    def ordered_actions(self) -> list[str]:
        """Action variables in text order: depth-first from the root with
        numbered :op children visited in numeric order."""
        ordered: list[str] = []
        seen: set[str] = set()

        def visit(var: str) -> None:
            if var in seen:
                return
            seen.add(var)
            if self.kind[var] == "action":
                ordered.append(var)
            children = list(self.out.get(var, ()))
            ops = sorted(
                (c for c in children if _op_index(c[0]) is not None),
                key=lambda c: _op_index(c[0]))
            rest = [c for c in children if _op_index(c[0]) is None]
            for _, target, _inv in ops + rest:
                visit(target)

        visit(self.g.root)
        for var in self.g.instances:
            visit(var)
        return ordered


def _build_amr_sentence(acc: _GraphAccumulator, graph: AmrGraph, text_id: str) -> list[str]:
    ex = _AmrExtractor(graph)
    entity_ids: dict[str, str] = {}
    action_ids: dict[str, str] = {}
    for var in ex.ordered_actions():
        action_ids[var] = acc.add_action(graph.instances[var], ex.action_texts(var), text_id)
    for var in graph.instances:
        if ex.kind[var] == "entity" and not ex.folded_only(var):
            entity_ids[var] = acc.add_entity(ex.entity_label(var), ex.entity_texts(var), text_id)
    for action_var, action_id in action_ids.items():
        for role, target, _ in ex.out.get(action_var, ()):
            if role in _FOLD_ROLES:
                continue
            m = _ARG_ROLE_RE.match(role)
            edge_role = f"A{m.group(1)}" if m else role
            for entity_var in ex.expand_entities(target):
                if entity_var in entity_ids:
                    acc.add_edge(action_id, entity_ids[entity_var], edge_role,
                                 ACTION_ENTITY, text_id)
    return [action_ids[v] for v in ex.ordered_actions()]


def build_from_amr(parse: DocumentParse) -> GroundedKg:
    """Construct the grounded graph from AMR parses."""
    if parse.parse_kind != AMR:
        raise GraphError(f"expected an AMR parse, got {parse.parse_kind!r}")
    acc = _GraphAccumulator(parse.doc_id, parse.sentence_map())
    for sentence in parse.sentences:
        sentence_actions: list[str] = []
        for graph in parse.parses.get(sentence.text_id, ()):
            sentence_actions.extend(_build_amr_sentence(acc, graph, sentence.text_id))
        acc.chain_actions(sentence_actions, sentence.text_id)
    return acc.finish()


# ---------------------------------------------------------------------------
# SRL extraction


def build_from_srl(parse: DocumentParse) -> GroundedKg:
    """Construct the grounded graph from SRL frames.

    Argument texts are used verbatim as entity labels, so variant mentions
    of the same referent ("Peter", "to Peter") stay separate nodes.
    """
    if parse.parse_kind != SRL:
        raise GraphError(f"expected an SRL parse, got {parse.parse_kind!r}")
    acc = _GraphAccumulator(parse.doc_id, parse.sentence_map())
    for sentence in parse.sentences:
        frames: list[SrlFrame] = sorted(
            parse.parses.get(sentence.text_id, ()),
            key=lambda f: f.predicate_char_span[0])
        sentence_actions: list[str] = []
        for frame in frames:
            action_id = acc.add_action(
                frame.predicate_lemma, [frame.predicate_lemma], sentence.text_id)
            sentence_actions.append(action_id)
            for arg in frame.args:
                entity_id = acc.add_entity(arg.text, [arg.text], sentence.text_id)
                acc.add_edge(action_id, entity_id, arg.role, ACTION_ENTITY, sentence.text_id)
        acc.chain_actions(sentence_actions, sentence.text_id)
    return acc.finish()


def build_graph(parse: DocumentParse) -> GroundedKg:
    return build_from_srl(parse) if parse.parse_kind == SRL else build_from_amr(parse)


def build_query_graph(query_parse: DocumentParse) -> GroundedKg:
    """Run the document construction on a parsed query.

    A query whose parse yields no nodes falls back to a single entity node
    carrying the whole query text, so retrieval always has something to
    match. A completely empty query is invalid.
    """
    kg = build_graph(query_parse)
    if kg.nodes:
        return kg
    label = " ".join(
        s.coref_resolved or s.original for s in query_parse.sentences).strip()
    if not label:
        raise GraphError("query is empty: no parse nodes and no sentence text")
    acc = _GraphAccumulator(query_parse.doc_id, query_parse.sentence_map())
    for sentence in query_parse.sentences:
        acc.add_entity(label, [label], sentence.text_id)
    return acc.finish()


# ---------------------------------------------------------------------------
# Persistence (node-link JSON with stable key order)


def graph_to_dict(kg: GroundedKg) -> dict:
    return {
        "doc_id": kg.doc_id,
        "nodes": [
            {
                "node_id": n.node_id,
                "label": n.label,
                "texts": n.texts,
                "node_type": n.node_type,
                "grounded_texts": n.grounded_texts,
            }
            for n in sorted(kg.nodes.values(), key=lambda n: n.node_id)
        ],
        "edges": [
            {
                "source_node": e.source_node,
                "target_node": e.target_node,
                "edge_role": e.edge_role,
                "edge_type": e.edge_type,
                "grounded_texts": e.grounded_texts,
            }
            for e in kg.edges
        ],
        "sentences": [
            {
                "chunk_index": s.chunk_index,
                "sent_index": s.sent_index,
                "text_id": s.text_id,
                "original": s.original,
                "normalized": s.normalized,
                "coref_resolved": s.coref_resolved,
            }
            for s in sorted(kg.sentence_table.values(),
                            key=lambda s: (s.chunk_index, s.sent_index))
        ],
    }


def graph_from_dict(data: dict) -> GroundedKg:
    nodes = {
        n["node_id"]: KgNode(
            node_id=n["node_id"], label=n["label"], texts=list(n["texts"]),
            node_type=n["node_type"], grounded_texts=list(n["grounded_texts"]))
        for n in data["nodes"]
    }
    edges = [
        KgEdge(source_node=e["source_node"], target_node=e["target_node"],
               edge_role=e["edge_role"], edge_type=e["edge_type"],
               grounded_texts=list(e["grounded_texts"]))
        for e in data["edges"]
    ]
    sentences = {
        s["text_id"]: SentenceRecord(
            chunk_index=s["chunk_index"], sent_index=s["sent_index"],
            text_id=s["text_id"], original=s["original"],
            normalized=s["normalized"], coref_resolved=s["coref_resolved"])
        for s in data["sentences"]
    }
    kg = GroundedKg(doc_id=data.get("doc_id", ""), nodes=nodes, edges=edges,
                    sentence_table=sentences)
    validate_graph(kg)
    return kg


def export_graph(kg: GroundedKg, path: str | Path) -> None:
    """Write node-link JSON; re-importing yields a structurally equal graph."""
    path = Path(path)
    payload = json.dumps(graph_to_dict(kg), ensure_ascii=False, indent=1)
    path.write_text(payload + "\n", encoding="utf-8")


def load_graph(path: str | Path) -> GroundedKg:
    path = Path(path)
    if not path.exists():
        raise GraphError(f"graph file not found: {path}")
    return graph_from_dict(json.loads(path.read_text(encoding="utf-8")))
