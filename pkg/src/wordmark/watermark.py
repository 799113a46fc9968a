"""Serving-side watermarking: keyed target selection and case-preserving
lexical substitution over an offset-preserving tokenization.

Every operation here is a pure function of its inputs, so documents can be
watermarked in parallel without coordination. The keyed hash is FNV-1a
64-bit with an explicit key prefix and a fixed byte-level encoding, which
makes target assignments identical across platforms and trivially
re-implementable for independent verification.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path

from .lexicon import WORD_TOKEN_PATTERN, Lexicon, SubstitutionGroup

FNV64_OFFSET_BASIS = 14695981039346656037
FNV64_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1
_PART_SEPARATOR = 0x1F

MIN_KEY_BYTES = 16
DEFAULT_KEY_ENV = "WM_KEY"

_SCAN_RE = re.compile(WORD_TOKEN_PATTERN)


@dataclass(frozen=True, repr=False)
class WatermarkKey:
    """Secret bytes parameterizing the keyed hash. Never serialized."""

    secret: bytes

    def __post_init__(self):
        if len(self.secret) < MIN_KEY_BYTES:
            raise ValueError(f"key must be at least {MIN_KEY_BYTES} bytes")

    def __repr__(self) -> str:  # keep the material out of logs and tracebacks
        return f"WatermarkKey(<{len(self.secret)} bytes>)"


def key_from_hex(text: str) -> WatermarkKey:
    return WatermarkKey(bytes.fromhex(text.strip()))


def key_from_env(name: str = DEFAULT_KEY_ENV) -> WatermarkKey:
    value = os.environ.get(name)
    if not value:
        raise ValueError(f"environment variable {name} is not set")
    return key_from_hex(value)


def key_from_file(path: str | Path) -> WatermarkKey:
    return key_from_hex(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class TokenSpan:
    """A word or gap; start/end are UTF-8 byte offsets into the source."""

    text: str
    start: int
    end: int
    is_word: bool


def tokenize(text: str) -> list[TokenSpan]:
    """Split text into word and non-word spans that exactly partition it.

    Word spans are maximal runs of letters and apostrophes, joined across
    internal hyphens. Runs without any letter are classified as non-words.
    """
    if not text:
        return []
    if text.isascii():
        byte_of = None
    else:
        offsets = [0]
        for ch in text:
            offsets.append(offsets[-1] + len(ch.encode("utf-8")))
        byte_of = offsets.__getitem__

    spans: list[TokenSpan] = []

    def emit(chunk: str, start: int, end: int, is_word: bool) -> None:
        if byte_of is None:
            spans.append(TokenSpan(chunk, start, end, is_word))
        else:
            spans.append(TokenSpan(chunk, byte_of(start), byte_of(end), is_word))

    pos = 0
    for match in _SCAN_RE.finditer(text):
        if match.start() > pos:
            emit(text[pos : match.start()], pos, match.start(), False)
        token = match.group()
        emit(token, match.start(), match.end(), any(c.isalpha() for c in token))
        pos = match.end()
    if pos < len(text):
        emit(text[pos:], pos, len(text), False)
    return spans


def iter_words(text: str):
    """Yield word-token texts only, skipping span construction.

    Same token boundaries and word test as tokenize(); used on hot counting
    paths where offsets are not needed.
    """
    for match in _SCAN_RE.finditer(text):
        token = match.group()
        if any(c.isalpha() for c in token):
            yield token


def keyed_hash64(key: WatermarkKey, parts: list[str] | tuple[str, ...]) -> int:
    """FNV-1a over the key bytes, then each part lowercased behind a 0x1F byte."""
    if not parts:
        raise ValueError("parts must be non-empty")
    data = bytearray(key.secret)
    for part in parts:
        data.append(_PART_SEPARATOR)
        data.extend(part.lower().encode("utf-8"))
    value = FNV64_OFFSET_BASIS
    for byte in data:
        value ^= byte
        value = (value * FNV64_PRIME) & _MASK64
    return value


@dataclass(frozen=True)
class TargetAssignment:
    """The keyed choice among a group's interchangeable words."""

    group: SubstitutionGroup
    index: int
    target: str


def select_target(group: SubstitutionGroup, key: WatermarkKey) -> TargetAssignment:
    """Pick the group's target word: candidate at index 0, else a substitute.

    The index is the keyed hash of the whole group modulo the number of
    choices, so a fixed key maps every occurrence of a group to one word.
    """
    order = group.words
    index = keyed_hash64(key, order) % len(order)
    return TargetAssignment(group=group, index=index, target=order[index])


class CasePattern(Enum):
    LOWER = "lower"
    CAPITALIZED = "capitalized"
    UPPER = "upper"
    MIXED = "mixed"


def classify_case(token: str) -> CasePattern:
    letters = [c for c in token if c.isalpha()]
    if not letters or all(c.islower() for c in letters):
        return CasePattern.LOWER
    if all(c.isupper() for c in letters):
        return CasePattern.UPPER if len(letters) > 1 else CasePattern.CAPITALIZED
    if letters[0].isupper() and all(c.islower() for c in letters[1:]):
        return CasePattern.CAPITALIZED
    return CasePattern.MIXED


def recase(word: str, pattern: CasePattern) -> str:
    """Apply a case pattern to a lowercase word; mixed falls back to capitalized."""
    if pattern is CasePattern.LOWER:
        return word
    if pattern is CasePattern.UPPER:
        return word.upper()
    return word[:1].upper() + word[1:]


@dataclass(frozen=True)
class Replacement:
    """One substitution: the byte span, the original token, and what replaced it."""

    start: int
    end: int
    original: str
    target: str
    candidate: str
    index: int


@dataclass(frozen=True)
class _TargetIndex:
    by_candidate: dict[str, TargetAssignment]
    by_word: dict[str, TargetAssignment]


@lru_cache(maxsize=16)
def _target_index(lexicon: Lexicon, key: WatermarkKey) -> _TargetIndex:
    by_candidate: dict[str, TargetAssignment] = {}
    by_word: dict[str, TargetAssignment] = {}
    for group in lexicon.groups:
        assignment = select_target(group, key)
        by_candidate[group.candidate] = assignment
        for word in group.words:
            by_word[word] = assignment
    return _TargetIndex(by_candidate, by_word)


def apply_watermark(
    text: str, lexicon: Lexicon, key: WatermarkKey
) -> tuple[str, list[Replacement]]:
    """Replace every candidate-word occurrence by its keyed target word.

    Only candidates trigger a substitution; substitutes occurring naturally
    are left untouched. The replacement mirrors the original token's case.
    The log records every substitution, including identity ones (index 0).
    """
    index = _target_index(lexicon, key).by_candidate
    pieces: list[str] = []
    log: list[Replacement] = []
    for span in tokenize(text):
        if span.is_word:
            assignment = index.get(span.text.lower())
            if assignment is not None:
                replaced = recase(assignment.target, classify_case(span.text))
                pieces.append(replaced)
                log.append(
                    Replacement(
                        start=span.start,
                        end=span.end,
                        original=span.text,
                        target=replaced,
                        candidate=assignment.group.candidate,
                        index=assignment.index,
                    )
                )
                continue
        pieces.append(span.text)
    return "".join(pieces), log
