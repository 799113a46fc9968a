import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from conftest import BALANCED_KEY, DATA_DIR, DEMO_KEY, IDENTITY_KEY, KEY16
from oracles import keyed_hash_reference
from wordmark import (
    CasePattern,
    Lexicon,
    LexiconKind,
    SubstitutionGroup,
    WatermarkKey,
    apply_watermark,
    build_spelling_lexicon,
    classify_case,
    key_from_hex,
    keyed_hash64,
    load_spelling_pairs,
    recase,
    select_target,
    tokenize,
)


class TestWatermarkKey:
    def test_minimum_length(self):
        with pytest.raises(ValueError):
            WatermarkKey(b"short")

    def test_repr_hides_material(self):
        key = WatermarkKey(b"0123456789abcdef")
        assert "0123456789abcdef" not in repr(key)

    def test_key_from_hex(self):
        key = key_from_hex("30313233343536373839616263646566")
        assert key.secret == b"0123456789abcdef"


class TestTokenize:
    def test_basic_sentence(self):
        spans = tokenize("That is great.")
        words = [s.text for s in spans if s.is_word]
        gaps = [s.text for s in spans if not s.is_word]
        assert words == ["That", "is", "great"]
        assert gaps == [" ", " ", "."]

    def test_empty(self):
        assert tokenize("") == []

    def test_internal_hyphen_kept(self):
        words = [s.text for s in tokenize("post-war plan") if s.is_word]
        assert words == ["post-war", "plan"]

    def test_edge_hyphens_are_gaps(self):
        words = [s.text for s in tokenize("-abc war- a--b") if s.is_word]
        assert words == ["abc", "war", "a", "b"]

    def test_apostrophes_inside_words(self):
        words = [s.text for s in tokenize("don't stop the dogs' run") if s.is_word]
        assert words == ["don't", "stop", "the", "dogs'", "run"]

    def test_byte_offsets_are_utf8(self):
        spans = tokenize("café great")
        great = next(s for s in spans if s.text == "great")
        # 'é' is two bytes in UTF-8
        assert great.start == 6
        assert great.end == 11

    @given(st.text(max_size=200))
    @settings(max_examples=300)
    def test_partition_property(self, text):
        spans = tokenize(text)
        assert "".join(s.text for s in spans) == text
        for span in spans:
            if span.is_word:
                assert any(c.isalpha() for c in span.text)
        # maximality: no two adjacent word spans
        for left, right in zip(spans, spans[1:]):
            assert not (left.is_word and right.is_word)


class TestKeyedHash:
    def test_pinned_reference_value(self):
        value = keyed_hash64(KEY16, ["great", "bang-up", "smashing"])
        assert value == 12672337623239812457

    def test_agrees_with_independent_oracle(self):
        rng = np.random.default_rng(17)
        alphabet = "abcdefghijklmnopqrstuvwxyz'-"
        for _ in range(1000):
            secret = bytes(rng.integers(0, 256, size=int(rng.integers(16, 40))))
            parts = [
                "".join(alphabet[i] for i in rng.integers(0, len(alphabet), size=int(rng.integers(1, 12))))
                for _ in range(int(rng.integers(1, 4)))
            ]
            assert keyed_hash64(WatermarkKey(secret), parts) == keyed_hash_reference(secret, parts)

    def test_deterministic(self):
        parts = ["color", "colour"]
        assert keyed_hash64(KEY16, parts) == keyed_hash64(KEY16, parts)

    def test_lowercases_parts(self):
        assert keyed_hash64(KEY16, ["GREAT"]) == keyed_hash64(KEY16, ["great"])

    def test_key_sensitivity(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            secret = bytearray(rng.integers(0, 256, size=24))
            parts = ["word" + str(int(rng.integers(0, 10**6)))]
            base = keyed_hash64(WatermarkKey(bytes(secret)), parts)
            flip = int(rng.integers(0, len(secret)))
            secret[flip] ^= 1 << int(rng.integers(0, 8))
            assert keyed_hash64(WatermarkKey(bytes(secret)), parts) != base

    def test_empty_parts_rejected(self):
        with pytest.raises(ValueError):
            keyed_hash64(KEY16, [])


class TestSelectTarget:
    def test_pinned_assignment(self):
        group = SubstitutionGroup("great", ("bang-up", "smashing"), LexiconKind.SYNONYM)
        assignment = select_target(group, KEY16)
        # 12672337623239812457 mod 3 == 2
        assert assignment.index == 2
        assert assignment.target == "smashing"

    def test_index_zero_keeps_candidate(self, great_group):
        assignment = select_target(great_group, IDENTITY_KEY)
        assert assignment.index == 0
        assert assignment.target == "great"

    def test_stable_for_fixed_inputs(self, great_group):
        first = select_target(great_group, DEMO_KEY)
        second = select_target(great_group, DEMO_KEY)
        assert first == second
        assert first.target == "outstanding"

    def test_spelling_balance_over_bundled_pairs(self):
        lexicon = build_spelling_lexicon(load_spelling_pairs(DATA_DIR / "us_uk_pairs.tsv"))
        key = WatermarkKey(b"wm-spelling-balance-key-001")
        fraction = sum(select_target(g, key).index for g in lexicon.groups) / len(lexicon)
        assert 0.35 <= fraction <= 0.65

    def test_index_uniformity_chi_square(self):
        # >= 500 random-word groups, M=2: uniformity on {0,1,2} not rejected
        rng = np.random.default_rng(41)
        seen = set()
        groups = []
        while len(groups) < 600:
            words = [
                "".join(chr(ord("a") + c) for c in rng.integers(0, 26, size=int(rng.integers(4, 9))))
                for _ in range(3)
            ]
            if len(set(words)) == 3 and not (set(words) & seen):
                seen.update(words)
                groups.append(SubstitutionGroup(words[0], tuple(words[1:]), LexiconKind.SYNONYM))
        counts = np.bincount(
            [select_target(g, BALANCED_KEY).index for g in groups], minlength=3
        )
        assert chisquare(counts).pvalue > 0.01


class TestRecase:
    @pytest.mark.parametrize(
        "pattern,expected",
        [
            (CasePattern.LOWER, "outstanding"),
            (CasePattern.CAPITALIZED, "Outstanding"),
            (CasePattern.UPPER, "OUTSTANDING"),
            (CasePattern.MIXED, "Outstanding"),
        ],
    )
    def test_patterns(self, pattern, expected):
        assert recase("outstanding", pattern) == expected

    @pytest.mark.parametrize(
        "token,expected",
        [
            ("great", CasePattern.LOWER),
            ("Great", CasePattern.CAPITALIZED),
            ("GREAT", CasePattern.UPPER),
            ("gReat", CasePattern.MIXED),
            ("don't", CasePattern.LOWER),
            ("McGreat", CasePattern.MIXED),
        ],
    )
    def test_classify(self, token, expected):
        assert classify_case(token) == expected

    def test_hyphenated(self):
        assert recase("bang-up", CasePattern.CAPITALIZED) == "Bang-up"


class TestApplyWatermark:
    def test_substitution_in_context(self, great_lexicon):
        marked, log = apply_watermark("the great post-war plan", great_lexicon, DEMO_KEY)
        assert marked == "the outstanding post-war plan"
        assert len(log) == 1
        assert (log[0].original, log[0].target, log[0].candidate) == ("great", "outstanding", "great")

    def test_no_candidates_is_identity(self, great_lexicon):
        text = "nothing to change here."
        marked, log = apply_watermark(text, great_lexicon, DEMO_KEY)
        assert marked == text
        assert log == []

    def test_recasing(self, great_lexicon):
        marked, _ = apply_watermark("Great news", great_lexicon, DEMO_KEY)
        assert marked == "Outstanding news"
        marked, _ = apply_watermark("GREAT news", great_lexicon, DEMO_KEY)
        assert marked == "OUTSTANDING news"

    def test_identity_assignment_is_logged(self, great_lexicon):
        marked, log = apply_watermark("a great day", great_lexicon, IDENTITY_KEY)
        assert marked == "a great day"
        assert len(log) == 1
        assert log[0].index == 0

    def test_substitutes_do_not_trigger(self, great_lexicon):
        text = "an outstanding plan"
        marked, log = apply_watermark(text, great_lexicon, DEMO_KEY)
        assert marked == text
        assert log == []

    def test_locality_and_token_count(self, small_lexicon):
        text = 'He said: "GREAT, new things!"  (good?)'
        marked, _ = apply_watermark(text, small_lexicon, KEY16)
        original_spans = tokenize(text)
        marked_spans = tokenize(marked)
        assert len(original_spans) == len(marked_spans)
        for orig, new in zip(original_spans, marked_spans):
            if not orig.is_word:
                assert orig.text == new.text

    def test_trigger_soundness(self, small_lexicon):
        candidates = {g.candidate for g in small_lexicon.groups}
        text = "the GREAT novel smashing virtuous plan was new and good-ish"
        _, log = apply_watermark(text, small_lexicon, KEY16)
        assert {r.original.lower() for r in log} <= candidates

    def test_stability_across_occurrences(self, small_lexicon):
        text = "great things, great plans, GREAT futures"
        marked, log = apply_watermark(text, small_lexicon, KEY16)
        targets = {r.target.lower() for r in log}
        assert len(targets) == 1

    def _random_texts(self, count=1000):
        rng = np.random.default_rng(29)
        vocab = [
            "great", "new", "good", "novel", "smashing", "plan", "the", "a",
            "Great", "NEW", "post-war", "don't", "Über", "naïve", "stop",
        ]
        punct = [" ", "  ", ". ", ", ", "! ", ": ", "\t", " -- "]
        texts = []
        for _ in range(count):
            n = int(rng.integers(0, 14))
            parts = []
            for _ in range(n):
                parts.append(vocab[int(rng.integers(0, len(vocab)))])
                parts.append(punct[int(rng.integers(0, len(punct)))])
            texts.append("".join(parts))
        return texts

    def test_determinism_and_idempotence(self, small_lexicon):
        for text in self._random_texts(300):
            once, _ = apply_watermark(text, small_lexicon, KEY16)
            again, _ = apply_watermark(text, small_lexicon, KEY16)
            assert once == again
            twice, _ = apply_watermark(once, small_lexicon, KEY16)
            assert twice == once

    @given(st.text(max_size=120))
    @settings(max_examples=200)
    def test_idempotence_arbitrary_text(self, text):
        lexicon = Lexicon(
            (
                SubstitutionGroup("great", ("bang-up", "smashing"), LexiconKind.SYNONYM),
                SubstitutionGroup("new", ("novel", "newfound"), LexiconKind.SYNONYM),
            ),
            2,
            LexiconKind.SYNONYM,
        )
        once, _ = apply_watermark(text, lexicon, KEY16)
        twice, _ = apply_watermark(once, lexicon, KEY16)
        assert twice == once
