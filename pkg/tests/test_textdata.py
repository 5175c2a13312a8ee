import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vispell import textdata as td


def reference_tokenize(text: str) -> list[str]:
    """Character-loop reference for the tokenization rule: whitespace splits,
    punctuation runs become their own tokens."""
    tokens, current, mode = [], "", None  # mode: "word" | "punct"
    for ch in text:
        if ch.isspace():
            if current:
                tokens.append(current)
            current, mode = "", None
            continue
        kind = "word" if (ch.isalnum() or ch == "_") else "punct"
        if mode not in (None, kind):
            tokens.append(current)
            current = ""
        current += ch
        mode = kind
    if current:
        tokens.append(current)
    return tokens


class TestTokenize:
    def test_simple(self):
        assert td.tokenize("hà nội") == ["hà", "nội"]
        assert td.tokenize("") == []
        assert td.tokenize("a,b") == ["a", ",", "b"]

    @pytest.mark.parametrize("text", [
        "hà nội, việt nam.", "xin chào!!! bạn khỏe không?", "a,b...c",
        "  nhiều   khoảng  trắng ", "(ngoặc) [vuông] {nhọn}", "12.5 km",
    ])
    def test_matches_reference(self, text):
        assert td.tokenize(text) == reference_tokenize(text)

    @given(st.text(max_size=60))
    @settings(max_examples=200, deadline=None)
    def test_no_empty_tokens_and_matches_reference(self, text):
        tokens = td.tokenize(text)
        assert all(tokens)
        assert tokens == reference_tokenize(text)

    def test_spans_address_source(self):
        text = "hà nội, đẹp"
        for tok, start, end in td.tokenize_with_spans(text):
            assert text[start:end] == tok

    def test_detokenize_prose_roundtrip(self):
        for text in ["tôi đi học.", "hà nội, việt nam!", "trời mưa (rất to)."]:
            assert td.detokenize(td.tokenize(text)) == text


class TestVocab:
    def test_build_tiny(self):
        vocab = td.build_vocab([["a", "a", "b"]], 4)
        assert vocab.id_to_token == [td.PAD_TOKEN, td.UNK_TOKEN, "a", "b"]
        assert vocab.id_of("a") == 2
        assert vocab.id_of("zzz") == td.UNK_ID

    def test_tie_break_lexicographic(self):
        vocab = td.build_vocab([["a", "a", "b", "b"]], 3)
        assert vocab.id_to_token == [td.PAD_TOKEN, td.UNK_TOKEN, "a"]

    def test_char_level(self):
        vocab = td.build_vocab([["ab", "ba"]], 10, level="char")
        assert set("ab") <= set(vocab.id_to_token)

    def test_empty_corpus_errors(self):
        with pytest.raises(td.CorpusError):
            td.build_vocab([], 10)

    def test_max_size_bounds(self):
        with pytest.raises(ValueError):
            td.build_vocab([["a"]], 2)

    def test_save_load_roundtrip(self, tmp_path):
        vocab = td.build_vocab([["xin", "chào", "xin"]], 6)
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        again = td.Vocab.load(path)
        assert again.id_to_token == vocab.id_to_token

    def test_word_level_lowercases(self):
        vocab = td.build_vocab([["Hà", "hà"]], 4)
        assert "hà" in vocab
        assert "Hà" not in vocab


class TestEncode:
    def setup_method(self):
        self.wv = td.build_vocab([["hà", "nội", "đẹp"]], 10)
        self.cv = td.build_vocab([["hà", "nội", "đẹp", "nooij"]], 40, level="char")

    def test_clean_sentence(self):
        ex = td.encode(["hà", "nội"], ["hà", "nội"], [0, 0], self.wv, self.cv, 4, 6)
        assert ex.detect_labels.tolist() == [0, 0, 0, 0]
        assert ex.word_ids[:2].tolist() == ex.correct_labels[:2].tolist()
        assert ex.attn_mask.tolist() == [1, 1, 0, 0]
        assert ex.word_ids[2:].tolist() == [td.PAD_ID, td.PAD_ID]

    def test_oov_goes_to_unk_chars_survive(self):
        ex = td.encode(["nooij"], ["nội"], [1], self.wv, self.cv, 3, 8)
        assert ex.word_ids[0] == td.UNK_ID
        chars = [self.cv.id_of(c) for c in "nooij"]
        assert ex.char_ids[0, :5].tolist() == chars
        assert td.UNK_ID not in chars  # all keystroke letters are in cv
        assert ex.correct_labels[0] == self.wv.id_of("nội")
        assert ex.detect_labels[0] == 1

    def test_long_word_truncated(self):
        ex = td.encode(["đẹpđẹpđẹp"], ["đẹp"], [1], self.wv, self.cv, 2, 4)
        assert (ex.char_ids[0] != td.PAD_ID).sum() == 4

    def test_sentence_truncated_to_n_max(self):
        toks = ["hà"] * 7
        ex = td.encode(toks, toks, [0] * 7, self.wv, self.cv, 4, 4)
        assert ex.attn_mask.sum() == 4

    def test_padding_invariant(self):
        for n in (1, 2, 5):
            toks = ["hà"] * n
            ex = td.encode(toks, toks, [0] * n, self.wv, self.cv, 4, 4)
            assert ex.attn_mask.sum() == min(n, 4)

    def test_empty_sentence_rejected(self):
        with pytest.raises(ValueError):
            td.encode([], [], [], self.wv, self.cv, 4, 4)

    def test_deterministic(self):
        a = td.encode(["hà", "nội"], ["hà", "nội"], [0, 1], self.wv, self.cv, 4, 6)
        b = td.encode(["hà", "nội"], ["hà", "nội"], [0, 1], self.wv, self.cv, 4, 6)
        for field in ("word_ids", "char_ids", "detect_labels", "correct_labels", "attn_mask"):
            assert np.array_equal(getattr(a, field), getattr(b, field))


def make_doc(text="TA-50 không chuếc máy bay", idx=2, wrong="chuếc",
             suggestions=("chiếc",)):
    return {
        "id": "doc-1", "text": text,
        "current_revision_id": "r2", "previous_revision_id": "r1",
        "page_id": "p9",
        "mistakes": [{"token_index": idx, "wrong": wrong,
                      "suggestions": list(suggestions)}],
    }


class TestWikiTestset:
    def test_parse_table1_style_record(self, tmp_path):
        path = tmp_path / "wiki.jsonl"
        path.write_text(json.dumps(make_doc(), ensure_ascii=False) + "\n", "utf-8")
        docs = td.read_wiki_testset(path)
        assert len(docs) == 1
        assert docs[0].mistakes[0].wrong == "chuếc"
        assert docs[0].mistakes[0].suggestions == ["chiếc"]
        assert docs[0].whitespace_tokens()[2] == "chuếc"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "wiki.jsonl"
        path.write_text("", "utf-8")
        assert td.read_wiki_testset(path) == []

    def test_index_out_of_range_strict(self, tmp_path):
        path = tmp_path / "wiki.jsonl"
        path.write_text(json.dumps(make_doc(idx=99)) + "\n", "utf-8")
        with pytest.raises(td.CorpusError, match=r"wiki\.jsonl:1"):
            td.read_wiki_testset(path)

    def test_lenient_skips_bad_records(self, tmp_path):
        path = tmp_path / "wiki.jsonl"
        good = json.dumps(make_doc(), ensure_ascii=False)
        path.write_text("{not json}\n" + good + "\n", "utf-8")
        docs = td.read_wiki_testset(path, strict=False)
        assert len(docs) == 1

    def test_malformed_json_strict(self, tmp_path):
        path = tmp_path / "wiki.jsonl"
        path.write_text("{not json}\n", "utf-8")
        with pytest.raises(td.CorpusError, match=":1"):
            td.read_wiki_testset(path)

    def test_empty_suggestions_rejected(self, tmp_path):
        path = tmp_path / "wiki.jsonl"
        path.write_text(json.dumps(make_doc(suggestions=())) + "\n", "utf-8")
        with pytest.raises(td.CorpusError):
            td.read_wiki_testset(path)

    def test_write_read_roundtrip(self, tmp_path):
        path = tmp_path / "wiki.jsonl"
        original = [td.WikiTestDocument(
            id="d", text="hà lội đẹp", current_revision_id="c",
            previous_revision_id="p", page_id="g",
            mistakes=[td.Mistake(1, "lội", ["nội"])])]
        td.write_wiki_testset(original, path)
        again = td.read_wiki_testset(path)
        assert again == original
