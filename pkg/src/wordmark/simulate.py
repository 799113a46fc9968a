"""Parametric simulation of the extraction setting: corpora as produced by
an innocent model, or by a surrogate trained on a partially watermarked
response stream.

The surrogate is abstracted to a per-occurrence mixture: with probability
fidelity * watermarked_fraction it emits the keyed target word, otherwise
it falls back to natural word choice (the candidate with probability gamma,
else a uniformly random substitute). Everything is deterministic given the
config seed; sweep points derive independent RNG streams from
(seed, point index) so serial and parallel runs agree exactly.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from .detector import DEFAULT_ALPHA, VerificationReport, verify
from .lexicon import (
    FrequencyLexeme,
    Lexicon,
    LexiconKind,
    SubstitutionGroup,
    build_synonym_lexicon,
)
from .watermark import WatermarkKey, select_target

# Carrier sentence for simulated occurrences; keeps the corpus shaped like
# real text so the tokenizer path is exercised. Its words must not collide
# with any lexicon word.
FILLER_TEMPLATE = "we found it {} at the time ."
_FILLER_WORDS = frozenset(w for w in FILLER_TEMPLATE.replace("{}", "").split() if w.isalpha())


@dataclass(frozen=True)
class NaturalEmissionModel:
    """Word choice of an unwatermarked source: candidate with probability
    gamma, otherwise one of the substitutes uniformly."""

    gamma: float = 0.95

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie strictly between 0 and 1")


@dataclass(frozen=True)
class SurrogateConfig:
    watermarked_fraction: float
    fidelity: float
    occurrences_per_group: int
    n_groups: int
    n_substitutes: int
    seed: int
    natural: NaturalEmissionModel = NaturalEmissionModel()

    def __post_init__(self):
        if not 0.0 <= self.watermarked_fraction <= 1.0:
            raise ValueError("watermarked_fraction must lie in [0, 1]")
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValueError("fidelity must lie in [0, 1]")
        if self.occurrences_per_group < 1:
            raise ValueError("occurrences_per_group must be positive")
        if self.n_groups < 1:
            raise ValueError("n_groups must be positive")
        if self.n_substitutes < 1:
            raise ValueError("n_substitutes must be positive")


def _alpha_code(value: int, width: int = 4) -> str:
    letters = []
    for _ in range(width):
        letters.append(chr(ord("a") + value % 26))
        value //= 26
    return "".join(reversed(letters))


def synthetic_lexicon(n_groups: int, n_substitutes: int) -> Lexicon:
    """Deterministic letter-coded lexicon for simulations and tests."""
    groups = []
    for g in range(n_groups):
        candidate = "c" + _alpha_code(g)
        substitutes = tuple(f"s{_alpha_code(g)}z{_alpha_code(j, 2)}" for j in range(n_substitutes))
        groups.append(SubstitutionGroup(candidate, substitutes, LexiconKind.SYNONYM))
    return Lexicon(tuple(groups), n_substitutes, LexiconKind.SYNONYM)


def synthetic_lexemes(n_lexemes: int, n_synonyms: int) -> list[FrequencyLexeme]:
    """Deterministic lexeme list, frequencies descending, for sweep rebuilds."""
    lexemes = []
    for g in range(n_lexemes):
        synonyms = tuple(f"s{_alpha_code(g)}z{_alpha_code(j, 2)}" for j in range(n_synonyms))
        lexemes.append(
            FrequencyLexeme("c" + _alpha_code(g), "ADJ", 10 * (n_lexemes - g), synonyms)
        )
    return lexemes


def _prepare(config: SurrogateConfig, lexicon: Lexicon) -> tuple[SubstitutionGroup, ...]:
    if config.n_groups > len(lexicon.groups):
        raise ValueError(
            f"config requests {config.n_groups} groups but lexicon has {len(lexicon.groups)}"
        )
    if config.n_substitutes != lexicon.n_substitutes:
        raise ValueError(
            f"config declares {config.n_substitutes} substitutes per group "
            f"but lexicon has {lexicon.n_substitutes}"
        )
    groups = lexicon.groups[: config.n_groups]
    collisions = _FILLER_WORDS & set(lexicon.word_to_group)
    if collisions:
        raise ValueError(
            f"filler template words collide with lexicon words: {sorted(collisions)}"
        )
    return groups


def simulate_innocent_corpus(
    config: SurrogateConfig, lexicon: Lexicon, key: WatermarkKey | None = None
) -> list[str]:
    """Corpus from a model with no exposure to watermarked responses.

    The key parameter is accepted for signature parity with the surrogate
    simulator; sampling never consults it.
    """
    del key
    groups = _prepare(config, lexicon)
    rng = np.random.default_rng(config.seed)
    occ = config.occurrences_per_group
    natural = rng.random((len(groups), occ)) < config.natural.gamma
    picks = rng.integers(0, lexicon.n_substitutes, size=(len(groups), occ))
    lines = []
    for gi, group in enumerate(groups):
        for oi in range(occ):
            word = group.candidate if natural[gi, oi] else group.substitutes[picks[gi, oi]]
            lines.append(FILLER_TEMPLATE.format(word))
    return lines


def simulate_surrogate_corpus(
    config: SurrogateConfig, lexicon: Lexicon, key: WatermarkKey
) -> list[str]:
    """Corpus from a surrogate trained on a partially watermarked stream.

    Each occurrence emits the keyed target with probability
    fidelity * watermarked_fraction, else follows the natural model. The
    expected hit ratio is q + (1 - q) / n_choices for q = fidelity * fraction.
    """
    groups = _prepare(config, lexicon)
    rng = np.random.default_rng(config.seed)
    occ = config.occurrences_per_group
    q = config.fidelity * config.watermarked_fraction
    memorized = rng.random((len(groups), occ)) < q
    natural = rng.random((len(groups), occ)) < config.natural.gamma
    picks = rng.integers(0, lexicon.n_substitutes, size=(len(groups), occ))
    targets = [select_target(group, key).target for group in groups]
    lines = []
    for gi, group in enumerate(groups):
        for oi in range(occ):
            if memorized[gi, oi]:
                word = targets[gi]
            elif natural[gi, oi]:
                word = group.candidate
            else:
                word = group.substitutes[picks[gi, oi]]
            lines.append(FILLER_TEMPLATE.format(word))
    return lines


@dataclass(frozen=True)
class SweepRow:
    param: float | int
    hit: float
    k: int
    n: int
    p_value: float
    decision: str
    seed: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    config_echo: dict
    seed: int

    def to_csv(self) -> str:
        lines = ["param,hit,k,n,p_value,decision,seed"]
        for row in self.rows:
            lines.append(
                f"{row.param!r},{row.hit!r},{row.k},{row.n},"
                f"{row.p_value!r},{row.decision},{row.seed}"
            )
        return "\n".join(lines) + "\n"

    def config_json(self) -> str:
        return json.dumps(self.config_echo, indent=2)


def derive_seed(base_seed: int, index: int) -> int:
    """Independent 64-bit stream seed for a sweep point."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1, np.uint64)[0])


def _echo(config: SurrogateConfig, swept: str, values: list) -> dict:
    echo = asdict(config)
    echo["swept"] = swept
    echo["values"] = list(values)
    return echo


def mixture_sweep(
    config: SurrogateConfig,
    p_values: list[float],
    lexicon: Lexicon,
    key: WatermarkKey,
    tau: float | None = None,
    alpha: float = DEFAULT_ALPHA,
) -> SweepResult:
    """Simulate and verify one surrogate corpus per watermarked fraction."""
    values = sorted(p_values)
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise ValueError("watermarked fractions must lie in [0, 1]")
    rows = []
    for index, fraction in enumerate(values):
        point_seed = derive_seed(config.seed, index)
        point = replace(config, watermarked_fraction=fraction, seed=point_seed)
        corpus = simulate_surrogate_corpus(point, lexicon, key)
        report = verify(corpus, lexicon, key, tau=tau, alpha=alpha)
        rows.append(_row(fraction, report, point_seed))
    return SweepResult(tuple(rows), _echo(config, "watermarked_fraction", values), config.seed)


def m_sweep(
    config: SurrogateConfig,
    m_values: list[int],
    lexemes: list[FrequencyLexeme],
    key: WatermarkKey,
    tau: float | None = None,
    alpha: float = DEFAULT_ALPHA,
) -> SweepResult:
    """Rebuild the lexicon per substitute count and verify perfect transfer.

    Each point builds a fresh lexicon from the same lexeme source, simulates
    a fully watermarked, fully faithful surrogate, and records the p-value.
    """
    values = sorted(m_values)
    if any(not 1 <= v <= 5 for v in values):
        raise ValueError("substitute counts must lie in [1, 5]")
    rows = []
    for index, m in enumerate(values):
        lexicon_m = build_synonym_lexicon(lexemes, m, target_size=config.n_groups)
        point_seed = derive_seed(config.seed, index)
        point = replace(
            config,
            n_substitutes=m,
            watermarked_fraction=1.0,
            fidelity=1.0,
            seed=point_seed,
        )
        corpus = simulate_surrogate_corpus(point, lexicon_m, key)
        report = verify(corpus, lexicon_m, key, tau=tau, alpha=alpha)
        rows.append(_row(m, report, point_seed))
    return SweepResult(tuple(rows), _echo(config, "n_substitutes", values), config.seed)


def _row(param: float | int, report: VerificationReport, seed: int) -> SweepRow:
    return SweepRow(
        param=param,
        hit=report.hit,
        k=report.k,
        n=report.n,
        p_value=report.p_value,
        decision=report.decision.value,
        seed=seed,
    )
