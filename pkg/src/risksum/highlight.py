"""Budgeted highlight selection in three stages.

Stage 1 takes every risk-positive sentence regardless of budget. Stage 2
fills the remaining budget with sentences ranked by negative-sentiment
probability, stopping at the first sentence that would overflow. Stage 3,
when a term generator is available and budget remains, matches generator
phrase candidates back to sentences and appends them under the same rule.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Sequence

from risksum.corpus import Sentence
from risksum.scoring import ScoredSentence, TermProvider

logger = logging.getLogger(__name__)

_NUMBERING_RE = re.compile(r"\d+[.)]")


def word_count(text: str) -> int:
    """Number of maximal non-whitespace runs."""
    return len(text.split())


@dataclass(frozen=True)
class HighlightConfig:
    risk_threshold: float = 0.5
    word_budget: int = 300
    min_candidate_words: int = 3
    # Overflow rule for stages 2 and 3: stop at the first sentence that
    # would exceed the budget (default), or skip it and keep trying.
    skip_overflow: bool = False

    def __post_init__(self) -> None:
        if self.word_budget <= 0:
            raise ValueError("word_budget must be positive")
        if self.min_candidate_words < 1:
            raise ValueError("min_candidate_words must be >= 1")


@dataclass(frozen=True)
class HighlightEntry:
    sentence: Sentence
    provenance: str  # "risk" | "sentiment" | "llm_terms"


@dataclass(frozen=True)
class HighlightSet:
    user_id: str
    entries: tuple[HighlightEntry, ...]
    total_words: int


@dataclass(frozen=True)
class TermCandidateSet:
    source_text: str
    candidates: frozenset[str]


def _clean_token(raw: str) -> str | None:
    token = raw.strip("*,")
    if not token or _NUMBERING_RE.fullmatch(token):
        return None
    return token.lower()


def phrase_candidates(generator_output: str, min_words: int = 3) -> TermCandidateSet:
    """Every window of ``min_words`` or more consecutive cleaned tokens.

    Generator output arrives in unstable list formats; leading/trailing
    asterisks and commas are stripped from each token and bare numbering
    tokens like ``1.`` are dropped before windows are enumerated.
    """
    if min_words < 1:
        raise ValueError("min_words must be >= 1")
    words = [t for t in (_clean_token(raw) for raw in generator_output.split()) if t]
    candidates: set[str] = set()
    for width in range(min_words, len(words) + 1):
        for start in range(len(words) - width + 1):
            candidates.add(" ".join(words[start : start + width]))
    return TermCandidateSet(
        source_text=generator_output, candidates=frozenset(candidates)
    )


def _contains_aligned(norm_text: str, candidate: str) -> bool:
    start = 0
    while True:
        pos = norm_text.find(candidate, start)
        if pos == -1:
            return False
        end = pos + len(candidate)
        before_ok = pos == 0 or not (
            norm_text[pos - 1].isalnum() and candidate[0].isalnum()
        )
        after_ok = end == len(norm_text) or not (
            norm_text[end].isalnum() and candidate[-1].isalnum()
        )
        if before_ok and after_ok:
            return True
        start = pos + 1


def match_candidates(
    sentences: Sequence[Sentence], candidates: TermCandidateSet
) -> list[Sentence]:
    """Sentences containing any candidate, word-boundary aligned,
    document order, each sentence at most once."""
    if not candidates.candidates:
        return []
    matched: list[Sentence] = []
    for sentence in sentences:
        norm = " ".join(sentence.text.split()).lower()
        if any(_contains_aligned(norm, c) for c in candidates.candidates):
            matched.append(sentence)
    return matched


def extract_highlights(
    scored: Sequence[ScoredSentence],
    term_provider: TermProvider | None = None,
    config: HighlightConfig | None = None,
    *,
    user_id: str = "",
    posts_text: str | None = None,
) -> HighlightSet:
    """Select highlight sentences for one user's scored sentences.

    ``scored`` must be in document order and belong to a single user.
    ``posts_text`` is the prompt for the stage-3 generator; when omitted
    the sentence texts are joined as a stand-in. A term-provider failure
    logs a warning and returns the stage-1/2 result unchanged.
    """
    config = config if config is not None else HighlightConfig()
    entries: list[HighlightEntry] = []
    chosen: set[tuple[str, int]] = set()
    total = 0

    def key(sentence: Sentence) -> tuple[str, int]:
        return (sentence.post_id, sentence.index)

    def try_add(sentence: Sentence, provenance: str) -> bool:
        """Budgeted add; returns False when the caller should stop."""
        nonlocal total
        words = word_count(sentence.text)
        if total + words <= config.word_budget:
            entries.append(HighlightEntry(sentence, provenance))
            chosen.add(key(sentence))
            total += words
            return True
        return config.skip_overflow

    for item in scored:
        if item.risk_positive and key(item.sentence) not in chosen:
            entries.append(HighlightEntry(item.sentence, "risk"))
            chosen.add(key(item.sentence))
            total += word_count(item.sentence.text)

    remaining = [item for item in scored if key(item.sentence) not in chosen]
    remaining.sort(key=lambda item: -item.sentiment.p_negative)
    for item in remaining:
        if not try_add(item.sentence, "sentiment"):
            break

    if total < config.word_budget and term_provider is not None:
        prompt = (
            posts_text
            if posts_text is not None
            else " ".join(item.sentence.text for item in scored)
        )
        try:
            raw = term_provider(prompt)
        except Exception as exc:
            logger.warning(
                "term provider failed for user %r; highlights degrade to "
                "stages 1-2: %s",
                user_id,
                exc,
            )
        else:
            candidates = phrase_candidates(raw, config.min_candidate_words)
            unselected = [
                item.sentence for item in scored if key(item.sentence) not in chosen
            ]
            for sentence in match_candidates(unselected, candidates):
                if not try_add(sentence, "llm_terms"):
                    break

    return HighlightSet(user_id=user_id, entries=tuple(entries), total_words=total)
