"""Four-part template summary: opening, frequency, dictionary, generative.

Template strings are fixed and tested byte-exactly; callers must not
reformat them. The generative part is pass-through text from a generator
client and is appended verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from risksum.corpus import RiskLevel, Sentence
from risksum.lexicon import SummaryPhraseTable, contains_phrase, default_summary_table

OPENING_TEMPLATES = {
    RiskLevel.LOW: "This person is at low risk of suicide.",
    RiskLevel.MODERATE: "This person is at moderate risk of suicide.",
    RiskLevel.HIGH: "This person is at high risk of suicide.",
}

FREQUENCY_ONE = "This person made a post implying suicide."
FREQUENCY_TWO = "This person made multiple posts implying suicide."
FREQUENCY_MANY = "This person made lots of posts implying suicide."


@dataclass(frozen=True)
class SummaryParts:
    opening: str
    frequency: str | None = None
    dictionary: str | None = None
    generative: str | None = None


def opening_summary(level: RiskLevel) -> str:
    if level not in OPENING_TEMPLATES:
        raise ValueError(f"no opening template for risk level {level.value!r}")
    return OPENING_TEMPLATES[level]


def frequency_summary(n_risk_sentences: int) -> str | None:
    """Frequency sentence from the count of risk-positive sentences.

    The wording intentionally speaks of posts while the count is over
    sentences. Zero yields no sentence at all.
    """
    if n_risk_sentences < 0:
        raise ValueError("sentence count must be >= 0")
    if n_risk_sentences == 0:
        return None
    if n_risk_sentences == 1:
        return FREQUENCY_ONE
    if n_risk_sentences == 2:
        return FREQUENCY_TWO
    return FREQUENCY_MANY


def _join_phrases(phrases: Sequence[str]) -> str:
    if len(phrases) == 1:
        return phrases[0]
    return ", ".join(phrases[:-1]) + " and " + phrases[-1]


def dictionary_summary(
    user_sentences: Sequence[Sentence],
    table: SummaryPhraseTable | None = None,
) -> str | None:
    """One sentence per table row whose phrases occur in the user's text.

    Phrases are collected per row in table order, deduplicated, and
    joined as "a, b and c". Rows with no hits emit nothing; with no hits
    at all the part is absent.
    """
    table = table if table is not None else default_summary_table()
    pieces: list[str] = []
    for row in table.rows:
        found = [
            phrase
            for phrase in row.phrases
            if any(contains_phrase(s.text, phrase) for s in user_sentences)
        ]
        if found:
            pieces.append(f"{row.prefix} {_join_phrases(found)}.")
    if not pieces:
        return None
    return " ".join(pieces)


def assemble_summary(parts: SummaryParts) -> str:
    """Join present parts with single spaces, fixed order, no trailing
    whitespace."""
    ordered = (parts.opening, parts.frequency, parts.dictionary, parts.generative)
    return " ".join(part for part in ordered if part).rstrip()


def build_summary_parts(
    level: RiskLevel,
    n_risk_sentences: int,
    user_sentences: Sequence[Sentence],
    table: SummaryPhraseTable | None = None,
    generative_text: str | None = None,
) -> SummaryParts:
    return SummaryParts(
        opening=opening_summary(level),
        frequency=frequency_summary(n_risk_sentences),
        dictionary=dictionary_summary(user_sentences, table),
        generative=generative_text if generative_text else None,
    )
