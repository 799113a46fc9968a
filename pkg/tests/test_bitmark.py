import numpy as np
import pytest

from conftest import KEY16
from oracles import argmax_ones_reference, ngram_ones_reference
from wordmark import (
    BitStats,
    BitUnit,
    Decision,
    WatermarkKey,
    bit_sequence,
    bit_verify,
    is_match,
    select_bit_watermarked,
)
from wordmark.bitmark import format_selection, read_candidate_sets

FIXED_SENTENCE = (
    "the committee reviewed every proposal before voting on the final budget plan"
)


def rand_word(rng, low=4, high=9):
    return "".join(chr(ord("a") + c) for c in rng.integers(0, 26, size=int(rng.integers(low, high))))


def rand_line(rng, n_words):
    return " ".join(rand_word(rng) for _ in range(n_words))


class TestBitSequence:
    def test_empty_text(self):
        for unit in BitUnit:
            assert bit_sequence("", unit, KEY16) == BitStats(0, 0)

    def test_single_word_unigram(self):
        stats = bit_sequence("word", BitUnit.UNIGRAM, KEY16)
        assert stats.units == 1

    def test_bigram_unit_count_and_pinned_ones(self):
        # 12 words -> 11 sliding bigrams; ones count frozen via the
        # independent hash oracle
        stats = bit_sequence(FIXED_SENTENCE, BitUnit.BIGRAM, KEY16)
        assert stats.units == 11
        assert (stats.ones, stats.zeros) == (7, 4)
        assert ngram_ones_reference(FIXED_SENTENCE.split(), 2, KEY16.secret) == (7, 4)

    def test_too_short_for_order(self):
        assert bit_sequence("word", BitUnit.TRIGRAM, KEY16) == BitStats(0, 0)

    def test_sentence_unit_is_single(self):
        stats = bit_sequence(FIXED_SENTENCE, BitUnit.SENTENCE, KEY16)
        assert stats.units == 1

    def test_wordless_line_has_no_units(self):
        assert bit_sequence("1234 !!!", BitUnit.SENTENCE, KEY16) == BitStats(0, 0)

    def test_appending_a_word_adds_one_unigram_unit(self):
        rng = np.random.default_rng(5)
        line = rand_line(rng, 9)
        base = bit_sequence(line, BitUnit.UNIGRAM, KEY16)
        extended = bit_sequence(line + " " + rand_word(rng), BitUnit.UNIGRAM, KEY16)
        assert extended.units == base.units + 1


class TestSelectBitWatermarked:
    def test_single_candidate(self):
        index, stats = select_bit_watermarked(["only option here"], BitUnit.UNIGRAM, KEY16)
        assert index == 0
        assert stats.units == 3

    def test_tie_goes_to_lowest_index(self):
        # identical candidates tie exactly
        index, _ = select_bit_watermarked(["same words here"] * 3, BitUnit.UNIGRAM, KEY16)
        assert index == 0

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            select_bit_watermarked([], BitUnit.UNIGRAM, KEY16)

    def test_argmax_matches_recount_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            candidates = [rand_line(rng, int(rng.integers(3, 12))) for _ in range(5)]
            index, stats = select_bit_watermarked(candidates, BitUnit.UNIGRAM, KEY16)
            assert index == argmax_ones_reference(
                [c.split() for c in candidates], 1, KEY16.secret
            )
            for other in candidates:
                assert stats.ones >= bit_sequence(other, BitUnit.UNIGRAM, KEY16).ones


class TestIsMatch:
    def test_more_ones_matches(self):
        rng = np.random.default_rng(19)
        line = next(
            l for l in (rand_line(rng, 15) for _ in range(200))
            if (s := bit_sequence(l, BitUnit.UNIGRAM, KEY16)).ones > s.zeros
        )
        assert is_match(line, BitUnit.UNIGRAM, KEY16)

    def test_tie_is_not_a_match(self):
        rng = np.random.default_rng(19)
        line = next(
            l for l in (rand_line(rng, 10) for _ in range(500))
            if (s := bit_sequence(l, BitUnit.UNIGRAM, KEY16)).ones == s.zeros
        )
        assert not is_match(line, BitUnit.UNIGRAM, KEY16)

    def test_empty_is_not_a_match(self):
        assert not is_match("", BitUnit.UNIGRAM, KEY16)


class TestBitVerify:
    def test_all_match_closed_form(self):
        rng = np.random.default_rng(31)
        lines = []
        while len(lines) < 20:
            line = rand_line(rng, 15)
            if is_match(line, BitUnit.UNIGRAM, KEY16):
                lines.append(line)
        report = bit_verify(lines, BitUnit.UNIGRAM, KEY16)
        assert report.hit == 1.0
        assert report.p_value == pytest.approx(2 * 0.5**20, rel=1e-12)
        assert report.p_null == 0.5

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            bit_verify([], BitUnit.UNIGRAM, KEY16)

    def test_tie_warning(self):
        report = bit_verify(["", "some words"], BitUnit.UNIGRAM, KEY16)
        assert any("tied or empty" in w for w in report.warnings)

    def test_null_calibration_monte_carlo(self):
        # odd word counts: no ties, null match rate exactly 1/2
        inside = 0
        for seed in range(100):
            rng = np.random.default_rng(1000 + seed)
            lines = [rand_line(rng, 21) for _ in range(200)]
            report = bit_verify(lines, BitUnit.UNIGRAM, KEY16)
            if abs(report.hit - 0.5) <= 3 * (0.25 / 200) ** 0.5:
                inside += 1
        assert inside >= 99

    def test_selected_corpus_is_detected(self):
        rng = np.random.default_rng(47)
        key = WatermarkKey(b"bitmark-unit-test-key-01")
        selected = []
        for _ in range(60):
            candidates = [rand_line(rng, 17) for _ in range(5)]
            index, _ = select_bit_watermarked(candidates, BitUnit.UNIGRAM, key)
            selected.append(candidates[index])
        report = bit_verify(selected, BitUnit.UNIGRAM, key)
        assert report.hit > 0.55
        assert report.p_value < 1e-4
        assert report.decision is Decision.CONFIRMED


class TestCandidateFiles:
    def test_consecutive_grouping(self):
        lines = [
            "a\tfirst option",
            "a\tsecond option",
            "b\tlone option",
            "a\tnew set after gap",
        ]
        sets = read_candidate_sets(lines)
        assert [(i, len(c)) for i, c in sets] == [("a", 2), ("b", 1), ("a", 1)]

    def test_malformed_line(self):
        with pytest.raises(ValueError, match="line 1"):
            read_candidate_sets(["no tab separator"])

    def test_selection_format(self):
        assert format_selection("q7", 2, BitStats(8, 3)) == "q7\t2\t8\t3"
