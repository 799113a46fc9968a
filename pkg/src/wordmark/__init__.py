"""Lexical watermarking for text-generation APIs, with statistical
verification of suspected model extraction."""
from ._version import __version__
from .bitmark import (
    BitStats,
    BitUnit,
    bit_sequence,
    bit_verify,
    is_match,
    select_bit_watermarked,
)
from .detector import (
    Decision,
    GroupEvidence,
    HitStatistics,
    VerificationReport,
    binomial_p_value,
    count_hits,
    default_tau,
    detect,
    render_text_report,
    verify,
)
from .lexicon import (
    FrequencyLexeme,
    Lexicon,
    LexiconBuildError,
    LexiconError,
    LexiconFormatError,
    LexiconKind,
    SubstitutionGroup,
    build_spelling_lexicon,
    build_synonym_lexicon,
    lexicon_fingerprint,
    load_lexemes,
    load_lexicon,
    load_spelling_pairs,
    save_lexicon,
    validate_lexicon,
)
from .simulate import (
    NaturalEmissionModel,
    SurrogateConfig,
    SweepResult,
    SweepRow,
    m_sweep,
    mixture_sweep,
    simulate_innocent_corpus,
    simulate_surrogate_corpus,
    synthetic_lexemes,
    synthetic_lexicon,
)
from .watermark import (
    CasePattern,
    Replacement,
    TargetAssignment,
    TokenSpan,
    WatermarkKey,
    apply_watermark,
    classify_case,
    key_from_env,
    key_from_file,
    key_from_hex,
    keyed_hash64,
    recase,
    select_target,
    tokenize,
)

__all__ = [
    "__version__",
    "BitStats",
    "BitUnit",
    "CasePattern",
    "Decision",
    "FrequencyLexeme",
    "GroupEvidence",
    "HitStatistics",
    "Lexicon",
    "LexiconBuildError",
    "LexiconError",
    "LexiconFormatError",
    "LexiconKind",
    "NaturalEmissionModel",
    "Replacement",
    "SubstitutionGroup",
    "SurrogateConfig",
    "SweepResult",
    "SweepRow",
    "TargetAssignment",
    "TokenSpan",
    "VerificationReport",
    "WatermarkKey",
    "apply_watermark",
    "binomial_p_value",
    "bit_sequence",
    "bit_verify",
    "build_spelling_lexicon",
    "build_synonym_lexicon",
    "classify_case",
    "count_hits",
    "default_tau",
    "detect",
    "is_match",
    "key_from_env",
    "key_from_file",
    "key_from_hex",
    "keyed_hash64",
    "lexicon_fingerprint",
    "load_lexemes",
    "load_lexicon",
    "load_spelling_pairs",
    "m_sweep",
    "mixture_sweep",
    "recase",
    "render_text_report",
    "save_lexicon",
    "select_bit_watermarked",
    "select_target",
    "simulate_innocent_corpus",
    "simulate_surrogate_corpus",
    "synthetic_lexemes",
    "synthetic_lexicon",
    "tokenize",
    "validate_lexicon",
    "verify",
]
