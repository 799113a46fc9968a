"""Bit-watermark baseline: pick, among candidate generations, the one whose
hashed units yield the most 1 bits; verify by counting lines where ones
exceed zeros against a fair-coin null.

Units are sliding n-grams over word tokens, or the whole line. The bit of
a unit is the lowest bit of the keyed hash. Ties (and lines with no units)
count as non-matches, which is slightly conservative.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .detector import DEFAULT_ALPHA, VerificationReport, build_report
from .watermark import WatermarkKey, iter_words, keyed_hash64


class BitUnit(str, Enum):
    UNIGRAM = "unigram"
    BIGRAM = "bigram"
    TRIGRAM = "trigram"
    SENTENCE = "sentence"


_NGRAM_ORDER = {BitUnit.UNIGRAM: 1, BitUnit.BIGRAM: 2, BitUnit.TRIGRAM: 3}

BIT_NULL_PROBABILITY = 0.5


@dataclass(frozen=True)
class BitStats:
    ones: int
    zeros: int

    @property
    def units(self) -> int:
        return self.ones + self.zeros


def bit_sequence(text: str, unit: BitUnit, key: WatermarkKey) -> BitStats:
    """Count 1 and 0 bits over the text's units under the keyed hash."""
    words = list(iter_words(text))
    if not words:
        return BitStats(0, 0)
    if unit is BitUnit.SENTENCE:
        bits = [keyed_hash64(key, [text]) & 1]
    else:
        order = _NGRAM_ORDER[unit]
        bits = [
            keyed_hash64(key, words[i : i + order]) & 1
            for i in range(len(words) - order + 1)
        ]
    ones = sum(bits)
    return BitStats(ones=ones, zeros=len(bits) - ones)


def select_bit_watermarked(
    candidates: list[str], unit: BitUnit, key: WatermarkKey
) -> tuple[int, BitStats]:
    """Index of the candidate with the most 1 bits; ties go to the lowest index."""
    if not candidates:
        raise ValueError("candidate list is empty")
    best_index = 0
    best = bit_sequence(candidates[0], unit, key)
    for i, candidate in enumerate(candidates[1:], start=1):
        stats = bit_sequence(candidate, unit, key)
        if stats.ones > best.ones:
            best_index, best = i, stats
    return best_index, best


def is_match(text: str, unit: BitUnit, key: WatermarkKey) -> bool:
    stats = bit_sequence(text, unit, key)
    return stats.ones > stats.zeros


def bit_verify(
    corpus: list[str],
    unit: BitUnit,
    key: WatermarkKey,
    tau: float = BIT_NULL_PROBABILITY,
    alpha: float = DEFAULT_ALPHA,
) -> VerificationReport:
    """Exact binomial test of the per-line match count against p = 1/2."""
    if not corpus:
        raise ValueError("empty corpus")
    matches = 0
    ties = 0
    for line in corpus:
        stats = bit_sequence(line, unit, key)
        if stats.ones > stats.zeros:
            matches += 1
        elif stats.ones == stats.zeros:
            ties += 1
    warnings = []
    if ties:
        warnings.append(
            f"{ties} of {len(corpus)} lines had tied or empty bit counts "
            "(counted as non-matches)"
        )
    return build_report(
        k=matches,
        n=len(corpus),
        p_null=BIT_NULL_PROBABILITY,
        tau=tau,
        alpha=alpha,
        warnings=warnings,
    )


def read_candidate_sets(lines: Iterable[str]) -> list[tuple[str, list[str]]]:
    """Parse ``input_id<TAB>candidate_text`` lines.

    Consecutive lines sharing an input_id form one candidate set; a repeated
    id after a gap starts a new set.
    """
    sets: list[tuple[str, list[str]]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            input_id, text = line.split("\t", 1)
        except ValueError:
            raise ValueError(f"line {lineno}: expected 'input_id<TAB>candidate_text'")
        if sets and sets[-1][0] == input_id:
            sets[-1][1].append(text)
        else:
            sets.append((input_id, [text]))
    return sets


def format_selection(input_id: str, index: int, stats: BitStats) -> str:
    return f"{input_id}\t{index}\t{stats.ones}\t{stats.zeros}"
