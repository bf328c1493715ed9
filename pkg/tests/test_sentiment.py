"""Lexicon loading, segmentation, and valence scoring tests."""
from __future__ import annotations

import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from arcminer import Lexicon, load_lexicon, score_document, score_sentence, segment_sentences
from arcminer.sentiment import LexiconError
from conftest import doc_from_sentences, make_srt
from arcminer import parse_srt


def lex(**entries) -> Lexicon:
    return Lexicon(entries=dict(entries))


class TestLoadLexicon:
    def test_direct_read(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good\t1\nbad\t-1\n", encoding="utf-8")
        lexicon = load_lexicon(path)
        assert lexicon.entries == {"good": 1, "bad": -1}

    def test_sign_ternarization(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("superb\t0.75\nmeh\t0\nawful\t-0.2\n", encoding="utf-8")
        assert load_lexicon(path).entries == {"superb": 1, "meh": 0, "awful": -1}

    def test_lowercase_last_wins_with_warning(self, tmp_path, caplog):
        path = tmp_path / "lex.tsv"
        path.write_text("Good\t1\ngood\t-1\n", encoding="utf-8")
        with caplog.at_level(logging.WARNING):
            lexicon = load_lexicon(path)
        assert lexicon.entries == {"good": -1}
        assert any("duplicate" in r.message for r in caplog.records)

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("# header\n\ngood\t1\n", encoding="utf-8")
        assert load_lexicon(path).entries == {"good": 1}

    def test_bad_value_line_numbered(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good\t1\nbad\tNaNope\n", encoding="utf-8")
        with pytest.raises(LexiconError, match="line 2"):
            load_lexicon(path)

    def test_missing_tab_line_numbered(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good 1\n", encoding="utf-8")
        with pytest.raises(LexiconError, match="line 1"):
            load_lexicon(path)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(LexiconError):
            load_lexicon(tmp_path / "nope.tsv")


class TestSegmentSentences:
    def test_delimiter_split_within_cue(self):
        doc = doc_from_sentences(["Stop! Who goes there?"])
        assert segment_sentences(doc) == ["Stop!", "Who goes there?"]

    def test_joined_across_cues(self):
        raw = make_srt(["I think", "we should go."]).encode()
        doc = parse_srt(raw)
        assert segment_sentences(doc) == ["I think we should go"]

    def test_speaker_dash_ends_sentence(self):
        raw = make_srt(["I think", "- Go now."]).encode()
        doc = parse_srt(raw)
        assert segment_sentences(doc) == ["I think", "Go now"]

    def test_ellipsis_character_terminates(self):
        doc = doc_from_sentences(["Well… maybe not."])
        assert segment_sentences(doc) == ["Well", "maybe not"]

    def test_cleaning_can_empty_a_sentence(self):
        raw = make_srt(["123. Real words here."]).encode()
        doc = parse_srt(raw)
        assert segment_sentences(doc) == ["Real words here"]

    def test_trailing_open_sentence_flushed(self):
        doc = doc_from_sentences(["no punctuation at the end"])
        assert segment_sentences(doc) == ["no punctuation at the end"]


class TestScoreSentence:
    def test_sums_valences(self):
        assert score_sentence("good good bad", lex(good=1, bad=-1)) == 1

    def test_out_of_lexicon_is_zero(self):
        assert score_sentence("the quick fox", lex(good=1)) == 0

    def test_edge_punctuation_stripped(self):
        assert score_sentence("bad!", lex(bad=-1)) == -1
        assert score_sentence("good?", lex(good=1)) == 1

    def test_lowercasing(self):
        assert score_sentence("GOOD Bad", lex(good=1, bad=-1)) == 0

    @given(st.lists(st.sampled_from(["good", "bad", "meh", "zap"]), max_size=30))
    def test_order_independent(self, tokens):
        lexicon = lex(good=1, bad=-1, meh=0)
        forward = score_sentence(" ".join(tokens), lexicon)
        backward = score_sentence(" ".join(reversed(tokens)), lexicon)
        assert forward == backward


class TestScoreDocument:
    def test_scaled_by_max_abs(self):
        doc = doc_from_sentences([
            "good good.",               # +2
            "bad bad bad bad.",         # -4
            "good.",                    # +1
        ])
        series = score_document(doc, lex(good=1, bad=-1))
        assert series.values == [0.5, -1.0, 0.25]
        assert series.sentence_count == 3

    def test_zero_max_guard(self):
        doc = doc_from_sentences(["nothing here.", "plain words."])
        series = score_document(doc, lex(good=1))
        assert series.values == [0.0, 0.0]

    def test_single_sentence(self):
        doc = doc_from_sentences(["good good good."])
        assert score_document(doc, lex(good=1)).values == [1.0]

    def test_empty_after_cleaning_raises(self):
        doc = parse_srt(make_srt(["1234."]).encode(), source_id="n")
        with pytest.raises(ValueError, match="empty document"):
            score_document(doc, lex(good=1))

    def test_empty_lexicon_all_zero(self):
        doc = doc_from_sentences(["good day.", "bad night."])
        series = score_document(doc, Lexicon(entries={}))
        assert all(v == 0.0 for v in series.values)

    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=20))
    def test_sign_preserved_and_peak_is_unit(self, sums):
        sentences = []
        for s in sums:
            word = "good" if s > 0 else "bad"
            sentences.append((" ".join([word] * abs(s)) if s else "filler") + ".")
        doc = doc_from_sentences(sentences)
        series = score_document(doc, lex(good=1, bad=-1))
        assert len(series.values) == len(sums)
        for raw, scaled in zip(sums, series.values):
            assert (raw > 0) == (scaled > 0) and (raw < 0) == (scaled < 0)
        peak = max(abs(v) for v in series.values)
        assert peak in (0.0, 1.0)
