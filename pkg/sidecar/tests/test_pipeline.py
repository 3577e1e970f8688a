import json
from pathlib import Path

import pytest

from nlp_sidecar.bundle import make_bundle
from nlp_sidecar.chunking import split_chunks, token_count
from nlp_sidecar.config import SidecarConfig, SidecarError
from nlp_sidecar.coref import CorefState
from nlp_sidecar.parse_lite import sentence_to_frames, sentence_to_penman
from nlp_sidecar.segment import split_sentences

BREW_SENTENCE = ("Peter's mother put Peter to bed and made some camomile tea; "
                 "and Peter's mother gave a dose of some camomile tea to Peter!")


class TestChunking:
    def test_empty_document(self):
        assert split_chunks("") == []
        assert split_chunks("   \n\n  ") == []

    def test_small_document_single_chunk(self):
        text = "One paragraph.\n\nAnother paragraph."
        assert split_chunks(text, chunk_size=100) == [text]

    def test_five_thousand_token_setting_gives_two_chunks(self):
        paragraphs = [f"Paragraph {i} " + "word " * 140 for i in range(55)]
        text = "\n\n".join(paragraphs)  # ~7.8k tokens
        chunks = split_chunks(text, chunk_size=5000)
        assert len(chunks) == 2
        assert all(token_count(c) <= 5000 for c in chunks)

    def test_zero_overlap_preserves_tokens(self):
        text = "\n\n".join(f"para {i} " + "tok " * 30 for i in range(20))
        chunks = split_chunks(text, chunk_size=100)
        assert " ".join(chunks).split() == text.split()

    def test_overlap_repeats_tail_tokens(self):
        text = "\n\n".join(f"para{i} " + "tok " * 30 for i in range(8))
        chunks = split_chunks(text, chunk_size=100, overlap=5)
        assert len(chunks) > 1
        for previous, chunk in zip(chunks, chunks[1:]):
            assert chunk.split()[:5] == previous.split()[-5:]

    def test_chunks_respect_paragraphs_when_possible(self):
        text = "A " * 80 + "\n\n" + "B " * 80
        chunks = split_chunks(text, chunk_size=100)
        assert len(chunks) == 2
        assert set(chunks[0].split()) == {"A"}
        assert set(chunks[1].split()) == {"B"}


class TestSegmentation:
    def test_abbreviations_protected(self):
        text = ("Mr. McGregor was on his knees. Peter ran away. "
                "Mrs. Rabbit went to the baker's.")
        sentences = split_sentences(text)
        assert len(sentences) == 3
        assert sentences[0].startswith("Mr. McGregor")
        assert sentences[2].startswith("Mrs. Rabbit")

    def test_exclamations_and_questions(self):
        sentences = split_sentences("Stop thief! Where is Peter? He ran home.")
        assert sentences == ["Stop thief!", "Where is Peter?", "He ran home."]

    def test_initials(self):
        sentences = split_sentences("The book is by B. Potter. It is short.")
        assert len(sentences) == 2

    def test_empty(self):
        assert split_sentences("") == []


class TestCoref:
    def test_subject_pronoun_resolved(self):
        state = CorefState()
        first = state.resolve("Peter was very tired.")
        second = state.resolve("He went home.")
        assert first == "Peter was very tired."
        assert second == "Peter went home."

    def test_possessive_and_object_pronouns(self):
        state = CorefState()
        state.resolve("Peter lost a shoe.")
        resolved = state.resolve("His mother put him to bed.")
        assert resolved == "Peter's mother put Peter to bed."

    def test_in_sentence_antecedent(self):
        state = CorefState()
        resolved = state.resolve("Mr. McGregor jumped up and he ran after Peter.")
        assert "Mr. McGregor ran after Peter" in resolved

    def test_no_antecedent_leaves_pronoun(self):
        state = CorefState()
        assert state.resolve("He ran home.") == "He ran home."


class TestLiteParser:
    def test_brew_sentence_skeleton(self):
        penman, skipped = sentence_to_penman(BREW_SENTENCE)
        assert skipped == 0
        assert penman.startswith("(a / and")
        assert ":op1 (p / put-01" in penman
        assert ":op2 (m2 / make-01" in penman
        assert ":op3 (d / dose-01" in penman
        # shared agent and shared tea variable (reentrancy, not copies)
        assert penman.count("have-rel-role-91") == 1
        assert penman.count("/ tea") == 1
        assert ":ARG2 t)" in penman
        assert ":mod (c / camomile)" in penman
        assert ":quant (s / some)" in penman

    def test_single_clause_no_coordination_root(self):
        penman, _ = sentence_to_penman("Peter ate some radishes.")
        assert penman.startswith("(e / eat-01")
        assert ":ARG1 (r / radish" in penman

    def test_unparseable_sentence_skipped(self):
        penman, skipped = sentence_to_penman("THE END.")
        assert penman is None
        assert skipped >= 1

    def test_np_coordination_not_split(self):
        penman, _ = sentence_to_penman(
            "Flopsy had bread and milk and blackberries for supper.")
        assert penman.count("have-01") == 1

    def test_frames_cover_all_clauses_with_spans(self):
        frames, skipped = sentence_to_frames(BREW_SENTENCE)
        assert skipped == 0
        assert [f["predicate"] for f in frames] == ["put", "made", "gave"]
        for frame in frames:
            start, end = frame["pred_span"]
            assert BREW_SENTENCE[start:end] == frame["predicate"]
            for arg in frame["args"]:
                s, e = arg["span"]
                assert BREW_SENTENCE[s:e] == arg["text"]
        gave = frames[2]
        roles = {a["role"]: a["text"] for a in gave["args"]}
        assert roles["A0"] == "Peter's mother"
        assert roles["A1"] == "a dose of some camomile tea"
        assert roles["A2"] == "to Peter"
        # the second subject mention is located after the first
        a0_spans = [a["span"] for f in frames for a in f["args"]
                    if a["role"] == "A0"]
        assert a0_spans[2][0] > a0_spans[0][0]


class TestBundle:
    def doc(self, tmp_path, text):
        path = tmp_path / "doc.txt"
        path.write_text(text, encoding="utf-8")
        return path

    def test_bundle_records_and_header(self, tmp_path):
        doc = self.doc(tmp_path, "Peter ran home. His mother made some tea.")
        out = tmp_path / "bundle.jsonl"
        stats = make_bundle(SidecarConfig(input_path=str(doc), out_path=str(out)))
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert lines[0]["kind"] == "comment"
        assert lines[0]["generator"] == "nlp-sidecar"
        kinds = [l["kind"] for l in lines[1:]]
        assert kinds == ["sentence", "sentence", "amr", "amr"]
        assert stats.sentences == 2 and stats.parses == 2 and stats.skipped == 0
        assert lines[3]["text_id"] == "text_0-0"
        # pronoun resolution flowed into the sentence tuple
        assert lines[2]["coref_resolved"].startswith("Peter's mother")

    def test_text_id_is_pure_function_of_position(self, tmp_path):
        doc = self.doc(tmp_path, "One sentence. Two sentence. Three sentence.")
        out = tmp_path / "bundle.jsonl"
        make_bundle(SidecarConfig(input_path=str(doc), out_path=str(out)))
        records = [json.loads(l) for l in out.read_text().splitlines()
                   if '"sentence"' in l]
        for record in records:
            assert record["kind"] == "sentence"
        parses = [json.loads(l) for l in out.read_text().splitlines()
                  if json.loads(l)["kind"] == "amr"]
        for parse in parses:
            chunk, sent = parse["text_id"][len("text_"):].split("-")
            assert 0 <= int(sent) < len(records)
            assert int(chunk) == 0

    def test_empty_document_emits_zero_records(self, tmp_path):
        doc = self.doc(tmp_path, "")
        out = tmp_path / "bundle.jsonl"
        stats = make_bundle(SidecarConfig(input_path=str(doc), out_path=str(out)))
        assert out.read_text() == ""
        assert stats.sentences == 0 and stats.parses == 0

    def test_deterministic_output(self, tmp_path):
        doc = self.doc(tmp_path, "Peter ran home. He was tired. THE END.")
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        make_bundle(SidecarConfig(input_path=str(doc), out_path=str(a)))
        make_bundle(SidecarConfig(input_path=str(doc), out_path=str(b)))
        assert a.read_bytes() == b.read_bytes()

    def test_unparseable_sentences_kept_and_counted(self, tmp_path):
        doc = self.doc(tmp_path, "Peter ran home. THE END.")
        out = tmp_path / "bundle.jsonl"
        stats = make_bundle(SidecarConfig(input_path=str(doc), out_path=str(out)))
        assert stats.sentences == 2
        assert stats.parses == 1
        assert stats.skipped == 1
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert sum(1 for l in lines if l["kind"] == "sentence") == 2

    def test_srl_bundle(self, tmp_path):
        doc = self.doc(tmp_path, BREW_SENTENCE)
        out = tmp_path / "bundle.jsonl"
        stats = make_bundle(SidecarConfig(input_path=str(doc), out_path=str(out),
                                          parse_kinds=("srl",)))
        assert stats.parses == 3
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        srl = [l for l in lines if l["kind"] == "srl"]
        assert [f["predicate"] for f in srl] == ["put", "made", "gave"]

    def test_config_validation(self, tmp_path):
        with pytest.raises(SidecarError):
            SidecarConfig(input_path="x", out_path="y", chunk_size=0).validate()
        with pytest.raises(SidecarError):
            SidecarConfig(input_path="x", out_path="y", overlap=-1).validate()
        with pytest.raises(SidecarError):
            SidecarConfig(input_path="x", out_path="y",
                          parse_kinds=("amr", "srl")).validate()
        with pytest.raises(SidecarError, match="not found"):
            make_bundle(SidecarConfig(input_path=str(tmp_path / "missing.txt"),
                                      out_path=str(tmp_path / "out.jsonl")))
