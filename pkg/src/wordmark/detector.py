"""Owner-side verification: hit counting over a suspect corpus, an exact
two-tailed binomial test, and the two-stage screen/evaluate decision.

The null hypothesis is that each marked-word occurrence lands on the keyed
target with probability 1/(number of choices), independently. The test is
exact (no normal approximation); tail sums are evaluated in log space so
the binomial coefficients never overflow and tiny tails stay accurate down
to the smallest representable double.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, logsumexp

from ._version import __version__
from .lexicon import Lexicon, lexicon_fingerprint
from .watermark import WatermarkKey, _target_index, iter_words


class Decision(str, Enum):
    NO_EVIDENCE = "no_evidence"
    SUSPECTED = "suspected"
    CONFIRMED = "confirmed"


@dataclass
class HitStatistics:
    """Target hits k among n marked-word occurrences, with per-group tallies."""

    k: int
    n: int
    per_group: dict[str, tuple[int, int]]

    @property
    def hit(self) -> float:
        if self.n == 0:
            raise ValueError("hit is undefined: no marked-word occurrences")
        return self.k / self.n


def count_hits(corpus: list[str], lexicon: Lexicon, key: WatermarkKey) -> HitStatistics:
    """Tally occurrences of lexicon words and how many equal the keyed target.

    Counting is per token: a word repeated fifty times contributes fifty
    occurrences. Matching is case-insensitive.
    """
    by_word = _target_index(lexicon, key).by_word
    k = 0
    n = 0
    tallies: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for line in corpus:
        for token in iter_words(line):
            word = token.lower()
            assignment = by_word.get(word)
            if assignment is None:
                continue
            n += 1
            tally = tallies[assignment.group.candidate]
            tally[1] += 1
            if word == assignment.target:
                k += 1
                tally[0] += 1
    return HitStatistics(k=k, n=n, per_group={c: (t[0], t[1]) for c, t in tallies.items()})


class BinomialTest(NamedTuple):
    beta1: float
    beta2: float
    p_value: float


def binomial_p_value(k: int, n: int, p: float) -> BinomialTest:
    """Exact two-tailed binomial test.

    beta1 = Pr(X >= k), beta2 = Pr(X <= k) for X ~ Binomial(n, p); the
    p-value is 2 * min(beta1, beta2), clamped to 1. Tail sums are evaluated
    as log-gamma terms combined with logsumexp.
    """
    if n < 1:
        raise ValueError("no evidence: n must be at least 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    i = np.arange(n + 1)
    log_pmf = (
        gammaln(n + 1)
        - gammaln(i + 1)
        - gammaln(n - i + 1)
        + i * np.log(p)
        + (n - i) * np.log1p(-p)
    )
    beta1 = float(min(1.0, np.exp(logsumexp(log_pmf[k:]))))
    beta2 = float(min(1.0, np.exp(logsumexp(log_pmf[: k + 1]))))
    return BinomialTest(beta1, beta2, min(1.0, 2.0 * min(beta1, beta2)))


def detect(stats: HitStatistics, tau: float) -> bool:
    """First-stage screen: does the hit ratio exceed the threshold?"""
    if stats.n == 0:
        raise ValueError("insufficient evidence: no marked-word occurrences")
    return stats.hit > tau


def default_tau(n_choices: int) -> float:
    """Midpoint between the null hit ratio and perfect transfer."""
    return (1.0 + 1.0 / n_choices) / 2.0


DEFAULT_ALPHA = 1e-3

# A single group dominating the evidence makes the independence assumption
# shaky; flag it rather than adjusting the test.
_CONCENTRATION_FRACTION = 0.25


@dataclass(frozen=True)
class GroupEvidence:
    candidate: str
    target: str
    k: int
    n: int


@dataclass
class VerificationReport:
    hit: float | None
    p_value: float | None
    beta1: float | None
    beta2: float | None
    p_null: float
    n: int
    k: int
    tau: float
    alpha: float
    decision: Decision
    warnings: list[str]
    per_group: tuple[GroupEvidence, ...] = ()
    lexicon_fingerprint: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "hit": self.hit,
            "p_value": self.p_value,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "p_null": self.p_null,
            "n": self.n,
            "k": self.k,
            "tau": self.tau,
            "alpha": self.alpha,
            "decision": self.decision.value,
            "warnings": list(self.warnings),
            "tool_version": __version__,
            "lexicon_fingerprint": self.lexicon_fingerprint,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def build_report(
    k: int,
    n: int,
    p_null: float,
    tau: float,
    alpha: float,
    warnings: list[str] | None = None,
    per_group: tuple[GroupEvidence, ...] = (),
    fingerprint: str | None = None,
) -> VerificationReport:
    """Assemble a report from counts, applying the two-stage decision rule."""
    warnings = list(warnings or [])
    if n == 0:
        warnings.append("corpus contains no lexicon words; verification is inconclusive")
        return VerificationReport(
            hit=None, p_value=None, beta1=None, beta2=None, p_null=p_null,
            n=0, k=0, tau=tau, alpha=alpha, decision=Decision.NO_EVIDENCE,
            warnings=warnings, per_group=per_group, lexicon_fingerprint=fingerprint,
        )
    hit = k / n
    beta1, beta2, p_value = binomial_p_value(k, n, p_null)
    if hit <= tau:
        decision = Decision.NO_EVIDENCE
    elif p_value < alpha:
        decision = Decision.CONFIRMED
    else:
        decision = Decision.SUSPECTED
    return VerificationReport(
        hit=hit, p_value=p_value, beta1=beta1, beta2=beta2, p_null=p_null,
        n=n, k=k, tau=tau, alpha=alpha, decision=decision,
        warnings=warnings, per_group=per_group, lexicon_fingerprint=fingerprint,
    )


def verify(
    corpus: list[str],
    lexicon: Lexicon,
    key: WatermarkKey,
    tau: float | None = None,
    alpha: float = DEFAULT_ALPHA,
) -> VerificationReport:
    """Run the full owner-side check against a suspect corpus.

    Stage one screens on the hit ratio against tau (default: midpoint of the
    null ratio and 1.0); stage two computes the exact binomial p-value and
    confirms only below alpha.
    """
    stats = count_hits(corpus, lexicon, key)
    p_null = lexicon.null_hit_probability
    if tau is None:
        tau = default_tau(lexicon.n_choices)
    warnings: list[str] = []
    if stats.n > 0:
        for candidate, (_, n_g) in stats.per_group.items():
            if n_g > _CONCENTRATION_FRACTION * stats.n:
                warnings.append(
                    f"group {candidate!r} contributes {n_g} of {stats.n} occurrences; "
                    "evidence is group-correlated"
                )
    by_candidate = _target_index(lexicon, key).by_candidate
    evidence = tuple(
        GroupEvidence(
            candidate=group.candidate,
            target=by_candidate[group.candidate].target,
            k=stats.per_group[group.candidate][0],
            n=stats.per_group[group.candidate][1],
        )
        for group in lexicon.groups
        if group.candidate in stats.per_group
    )
    return build_report(
        k=stats.k, n=stats.n, p_null=p_null, tau=tau, alpha=alpha,
        warnings=warnings, per_group=evidence,
        fingerprint=lexicon_fingerprint(lexicon),
    )


def render_text_report(report: VerificationReport) -> str:
    """Plain-language summary suitable for a non-technical reader."""
    lines = [
        f"watermark verification report (tool {__version__})",
        f"decision: {report.decision.value.upper()}",
    ]
    if report.lexicon_fingerprint:
        lines.append(f"lexicon fingerprint: {report.lexicon_fingerprint}")
    if report.hit is None:
        lines.append("no occurrences of any lexicon word were found in the corpus.")
    else:
        lines.append(
            f"hit ratio: {report.hit:.4f} ({report.k} of {report.n} "
            "marked-word occurrences equal their keyed target)"
        )
        lines.append(
            f"expected ratio for an unrelated model: {report.p_null:.4f} "
            f"(one of {round(1 / report.p_null)} interchangeable choices)"
        )
        lines.append(
            f"two-tailed binomial p-value: {report.p_value:.3e} "
            f"(beta1={report.beta1:.3e}, beta2={report.beta2:.3e})"
        )
        lines.append(f"screening threshold tau: {report.tau:.4f}; significance alpha: {report.alpha:g}")
    if report.per_group:
        lines.append("evidence by group:")
        for ev in report.per_group:
            lines.append(
                f"  candidate {ev.candidate!r} -> target {ev.target!r}: "
                f"{ev.k}/{ev.n} occurrences matched"
            )
    for warning in report.warnings:
        lines.append(f"warning: {warning}")
    return "\n".join(lines) + "\n"
