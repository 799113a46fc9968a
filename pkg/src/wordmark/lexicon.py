"""Substitution lexicons: the confidential candidate -> substitutes rules.

A lexicon maps each candidate word to an ordered list of interchangeable
substitutes (synonyms of a frequent word, or the UK spelling of a US one).
Every surface word belongs to at most one group, in one role, so that
occurrence counts over a corpus are unambiguous. Lexicons are immutable
after construction and safe to share across threads.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path

# A word token: letters and apostrophes, with hyphens allowed only between
# such runs ("post-war", "rock-'n'-roll"). Shared with the tokenizer.
WORD_TOKEN_PATTERN = r"(?:[^\W\d_]|['’])+(?:-(?:[^\W\d_]|['’])+)*"
_WORD_RE = re.compile(rf"{WORD_TOKEN_PATTERN}\Z")

_HEADER_RE = re.compile(r"#kind=(synonym|spelling) M=(\d+)\Z")


class LexiconError(ValueError):
    """Base error for lexicon construction and I/O."""


class LexiconFormatError(LexiconError):
    """A lexicon or lexeme file is malformed; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"{message} at line {line}")


class LexiconBuildError(LexiconError):
    """Not enough valid material to build the requested lexicon."""


class LexiconKind(str, Enum):
    SYNONYM = "synonym"
    SPELLING = "spelling"


def _valid_word(word: str) -> bool:
    return bool(_WORD_RE.fullmatch(word)) and word == word.lower()


@dataclass(frozen=True)
class FrequencyLexeme:
    """A lemma with its corpus frequency and resource-ordered synonyms.

    Synonyms may be multi-word phrases; those are dropped later, when
    groups are formed. The lemma itself must be a single word token.
    """

    lemma: str
    pos: str
    frequency: int
    synonyms: tuple[str, ...]

    def __post_init__(self):
        if not _valid_word(self.lemma):
            raise ValueError(f"lemma {self.lemma!r} is not a lowercase word token")
        if self.frequency < 0:
            raise ValueError(f"frequency of {self.lemma!r} must be non-negative")
        if len(set(self.synonyms)) != len(self.synonyms):
            raise ValueError(f"synonyms of {self.lemma!r} contain duplicates")
        if self.lemma in self.synonyms:
            raise ValueError(f"synonyms of {self.lemma!r} contain the lemma itself")
        for syn in self.synonyms:
            if not syn or syn != syn.lower():
                raise ValueError(f"synonym {syn!r} of {self.lemma!r} must be lowercase")


@dataclass(frozen=True)
class SubstitutionGroup:
    """One candidate word and its interchangeable substitutes."""

    candidate: str
    substitutes: tuple[str, ...]
    kind: LexiconKind

    @property
    def n_substitutes(self) -> int:
        return len(self.substitutes)

    @property
    def words(self) -> tuple[str, ...]:
        """Candidate first, then substitutes in lexicon order."""
        return (self.candidate, *self.substitutes)


@dataclass(frozen=True)
class Lexicon:
    groups: tuple[SubstitutionGroup, ...]
    n_substitutes: int
    kind: LexiconKind

    @property
    def n_choices(self) -> int:
        """Number of interchangeable spellings per group (candidate included)."""
        return self.n_substitutes + 1

    @property
    def null_hit_probability(self) -> float:
        """Chance an unmarked source emits the keyed target word."""
        return 1.0 / self.n_choices

    @cached_property
    def word_to_group(self) -> dict[str, SubstitutionGroup]:
        return {w: g for g in self.groups for w in g.words}

    def __len__(self) -> int:
        return len(self.groups)


def validate_lexicon(lexicon: Lexicon) -> list[str]:
    """Return human-readable invariant violations; empty list means valid."""
    violations: list[str] = []
    owner: dict[str, str] = {}
    for group in lexicon.groups:
        label = f"group {group.candidate!r}"
        if group.n_substitutes < 1:
            violations.append(f"{label} has no substitutes")
        if group.n_substitutes != lexicon.n_substitutes:
            violations.append(
                f"{label} has {group.n_substitutes} substitutes, "
                f"lexicon declares {lexicon.n_substitutes}"
            )
        if group.kind != lexicon.kind:
            violations.append(f"{label} has kind {group.kind.value}, lexicon is {lexicon.kind.value}")
        if group.kind is LexiconKind.SPELLING and group.n_substitutes != 1:
            violations.append(f"{label} is a spelling group but has {group.n_substitutes} substitutes")
        if group.candidate in group.substitutes:
            violations.append(f"candidate {group.candidate!r} appears among its own substitutes")
        if len(set(group.substitutes)) != len(group.substitutes):
            violations.append(f"{label} has duplicate substitutes")
        for word in group.words:
            if not _valid_word(word):
                violations.append(f"{word!r} in {label} is not a lowercase word token")
            if word in owner and owner[word] != group.candidate:
                violations.append(
                    f"word {word!r} appears in group {owner[word]!r} and group {group.candidate!r}"
                )
            else:
                owner.setdefault(word, group.candidate)
    return violations


def _check_valid(lexicon: Lexicon) -> Lexicon:
    violations = validate_lexicon(lexicon)
    if violations:
        raise LexiconError("; ".join(violations))
    return lexicon


def build_synonym_lexicon(
    lexemes: list[FrequencyLexeme],
    n_substitutes: int,
    target_size: int,
) -> Lexicon:
    """Form groups from the most frequent lemmas down.

    For each lemma the substitutes are the last ``n_substitutes`` entries of
    its synonym list, after dropping multi-word phrases. Lemmas with too few
    usable synonyms are skipped, as is any lemma whose group would reuse a
    word already claimed by an earlier group.
    """
    if n_substitutes < 1:
        raise LexiconBuildError("substitute count must be at least 1")
    if target_size < 1:
        raise LexiconBuildError("target size must be at least 1")
    ordered = sorted(lexemes, key=lambda lx: (-lx.frequency, lx.lemma))
    taken: set[str] = set()
    groups: list[SubstitutionGroup] = []
    for lexeme in ordered:
        if len(groups) == target_size:
            break
        usable = [s for s in lexeme.synonyms if _valid_word(s)]
        if len(usable) < n_substitutes:
            continue
        substitutes = tuple(usable[-n_substitutes:])
        words = (lexeme.lemma, *substitutes)
        if any(w in taken for w in words):
            continue
        groups.append(SubstitutionGroup(lexeme.lemma, substitutes, LexiconKind.SYNONYM))
        taken.update(words)
    if len(groups) < target_size:
        raise LexiconBuildError(
            f"only {len(groups)} of {target_size} requested groups could be built "
            f"from {len(lexemes)} lexemes"
        )
    return _check_valid(Lexicon(tuple(groups), n_substitutes, LexiconKind.SYNONYM))


def build_spelling_lexicon(pairs: list[tuple[str, str]]) -> Lexicon:
    """One group per (US spelling, UK spelling) pair."""
    groups = []
    seen: dict[str, str] = {}
    for us, uk in pairs:
        for word in (us, uk):
            if not _valid_word(word):
                raise LexiconBuildError(f"{word!r} is not a lowercase word token")
            if word in seen:
                raise LexiconBuildError(f"{word!r} appears in two groups ({seen[word]!r} and {us!r})")
            seen[word] = us
        if us == uk:
            raise LexiconBuildError(f"pair {us!r} has identical spellings")
        groups.append(SubstitutionGroup(us, (uk,), LexiconKind.SPELLING))
    if not groups:
        raise LexiconBuildError("no spelling pairs given")
    return _check_valid(Lexicon(tuple(groups), 1, LexiconKind.SPELLING))


def serialize_lexicon(lexicon: Lexicon) -> str:
    lines = [f"#kind={lexicon.kind.value} M={lexicon.n_substitutes}"]
    for group in lexicon.groups:
        lines.append("\t".join(group.words))
    return "\n".join(lines) + "\n"


def save_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    Path(path).write_text(serialize_lexicon(lexicon), encoding="utf-8")


def load_lexicon(path: str | Path) -> Lexicon:
    """Parse and validate a lexicon TSV; raises LexiconFormatError with the line."""
    raw = Path(path).read_text(encoding="utf-8")
    lines = raw.split("\n")
    if not lines or not lines[0].strip():
        raise LexiconFormatError("empty lexicon")
    header = _HEADER_RE.fullmatch(lines[0].strip())
    if header is None:
        raise LexiconFormatError(
            "expected header '#kind=<synonym|spelling> M=<int>'", line=1
        )
    kind = LexiconKind(header.group(1))
    n_substitutes = int(header.group(2))
    if n_substitutes < 1:
        raise LexiconFormatError("M must be at least 1", line=1)
    if kind is LexiconKind.SPELLING and n_substitutes != 1:
        raise LexiconFormatError("spelling lexicons require M=1", line=1)

    groups: list[SubstitutionGroup] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if any(not f for f in fields):
            raise LexiconFormatError("malformed line (empty field)", line=lineno)
        if len(fields) != n_substitutes + 1:
            raise LexiconFormatError("inconsistent M", line=lineno)
        for word in fields:
            if not _valid_word(word):
                raise LexiconFormatError(f"invalid word {word!r}", line=lineno)
            if word in seen:
                raise LexiconFormatError(
                    f"duplicate word {word!r} (first seen at line {seen[word]})", line=lineno
                )
            seen[word] = lineno
        candidate, *substitutes = fields
        groups.append(SubstitutionGroup(candidate, tuple(substitutes), kind))
    if not groups:
        raise LexiconFormatError("empty lexicon")
    return _check_valid(Lexicon(tuple(groups), n_substitutes, kind))


def lexicon_fingerprint(lexicon: Lexicon) -> str:
    """Short stable digest of the lexicon content (never involves the key)."""
    digest = hashlib.sha256(serialize_lexicon(lexicon).encode("utf-8"))
    return digest.hexdigest()[:16]


def load_lexemes(path: str | Path, pos: str | None = None) -> list[FrequencyLexeme]:
    """Read a lexeme TSV: ``lemma<TAB>pos<TAB>frequency<TAB>syn1,syn2,...``.

    Entries are lowercased; duplicate synonyms and the lemma itself are
    dropped from the synonym list, preserving the file's ordering. When
    ``pos`` is given, only lexemes with that tag (case-insensitive) are kept.
    """
    lexemes: list[FrequencyLexeme] = []
    raw = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(raw.split("\n"), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise LexiconFormatError("expected 4 tab-separated fields", line=lineno)
        lemma, tag, freq_text, syn_text = (f.strip() for f in fields)
        try:
            frequency = int(freq_text)
        except ValueError:
            raise LexiconFormatError(f"frequency {freq_text!r} is not an integer", line=lineno)
        synonyms: list[str] = []
        for part in syn_text.lower().split(","):
            part = part.strip()
            if part and part != lemma.lower() and part not in synonyms:
                synonyms.append(part)
        try:
            lexeme = FrequencyLexeme(lemma.lower(), tag, frequency, tuple(synonyms))
        except ValueError as exc:
            raise LexiconFormatError(str(exc), line=lineno)
        if pos is None or lexeme.pos.upper() == pos.upper():
            lexemes.append(lexeme)
    return lexemes


def load_spelling_pairs(path: str | Path) -> list[tuple[str, str]]:
    """Read a two-column TSV of (us_spelling, uk_spelling) pairs."""
    pairs: list[tuple[str, str]] = []
    raw = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(raw.split("\n"), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = [f.strip().lower() for f in line.split("\t")]
        if len(fields) != 2 or not all(fields):
            raise LexiconFormatError("expected 2 tab-separated words", line=lineno)
        pairs.append((fields[0], fields[1]))
    return pairs
