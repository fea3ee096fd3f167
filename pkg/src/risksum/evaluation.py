"""Similarity scoring of highlights and the two statistical analyses.

Similarity follows the greedy token-matching scheme: recall averages,
over reference tokens, the best cosine against any candidate token;
precision mirrors it over candidate tokens. Embeddings are pluggable;
the default provider is exact-match one-hot, which reduces the scheme
to token-overlap scores.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import numpy as np

from risksum.corpus import RiskLevel, UserTimeline, timeline_sentences
from risksum.scoring import RiskScorer, SentimentScorer, score_sentences

logger = logging.getLogger(__name__)

_TOKEN_SPLIT_RE = re.compile(r"[\W_]+")


def similarity_tokens(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop empties."""
    return [t for t in _TOKEN_SPLIT_RE.split(text.lower()) if t]


class TokenEmbeddingProvider(Protocol):
    def embed(self, tokens: Sequence[str]) -> np.ndarray: ...


class OneHotEmbedding:
    """Exact-match embeddings: identical tokens get identical basis
    vectors, distinct tokens are orthogonal."""

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        vocab: dict[str, int] = {}
        for token in tokens:
            vocab.setdefault(token, len(vocab))
        out = np.zeros((len(tokens), max(len(vocab), 1)))
        for i, token in enumerate(tokens):
            out[i, vocab[token]] = 1.0
        return out


@dataclass(frozen=True)
class SimilarityReport:
    precision: float
    recall: float
    f1: float
    flag: str | None = None  # "both_empty" | "empty_candidate" | "empty_reference"


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _embedded(provider: TokenEmbeddingProvider, tokens: list[str]) -> np.ndarray:
    vectors = np.asarray(provider.embed(tokens), dtype=float)
    if vectors.shape[0] != len(tokens) or vectors.ndim != 2:
        raise ValueError(
            f"embedding provider returned shape {vectors.shape} for "
            f"{len(tokens)} tokens"
        )
    if not np.isfinite(vectors).all():
        raise ValueError("embedding provider returned non-finite values")
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    return np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms > 0)


def greedy_similarity(
    candidate_tokens: Sequence[str],
    reference_tokens: Sequence[str],
    provider: TokenEmbeddingProvider | None = None,
) -> SimilarityReport:
    """Greedy max-cosine matching between two token lists.

    Both lists are embedded in one provider call so context-sensitive
    providers see a single consistent vocabulary. Cosines are clipped to
    [0, 1] to keep the report inside the unit interval.
    """
    provider = provider if provider is not None else OneHotEmbedding()
    candidate = list(candidate_tokens)
    reference = list(reference_tokens)
    if not candidate and not reference:
        return SimilarityReport(1.0, 1.0, 1.0, "both_empty")
    if not candidate:
        return SimilarityReport(0.0, 0.0, 0.0, "empty_candidate")
    if not reference:
        return SimilarityReport(0.0, 0.0, 0.0, "empty_reference")
    vectors = _embedded(provider, candidate + reference)
    sims = np.clip(vectors[: len(candidate)] @ vectors[len(candidate) :].T, 0.0, 1.0)
    precision = float(sims.max(axis=1).mean())
    recall = float(sims.max(axis=0).mean())
    return SimilarityReport(precision, recall, _f1(precision, recall))


def span_precision(
    predicted_text: str,
    gold_texts: Sequence[str],
    provider: TokenEmbeddingProvider | None = None,
) -> float:
    """Best greedy precision of one predicted span against any gold span."""
    tokens = similarity_tokens(predicted_text)
    best = 0.0
    for gold in gold_texts:
        report = greedy_similarity(tokens, similarity_tokens(gold), provider)
        best = max(best, report.precision)
    return best


@dataclass(frozen=True)
class EvaluationReport:
    """Span-mean and user-mean aggregations, both emitted because the
    reference aggregation is ambiguous."""

    recall: float
    precision: float
    recall_user_mean: float
    precision_user_mean: float
    n_gold_spans: int
    n_predicted_spans: int
    users_without_predictions: tuple[str, ...]
    users_without_gold: tuple[str, ...]


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def evaluate_highlights(
    predicted: Mapping[str, Sequence[str]],
    gold: Mapping[str, Sequence[str]],
    provider: TokenEmbeddingProvider | None = None,
) -> EvaluationReport:
    """Score predicted highlight spans against gold spans per user.

    Each gold span contributes its best greedy recall against the user's
    predicted spans; each predicted span contributes its best greedy
    precision against the user's gold spans. Users with no gold spans do
    not contribute to recall, users with no predicted spans do not
    contribute to precision; cross-missing users score zero and are
    reported.
    """
    span_recalls: list[float] = []
    span_precisions: list[float] = []
    user_recall_means: list[float] = []
    user_precision_means: list[float] = []
    missing_predictions: list[str] = []
    missing_gold: list[str] = []

    for user_id in gold:
        gold_spans = [similarity_tokens(t) for t in gold[user_id]]
        if not gold_spans:
            continue
        pred_spans = [similarity_tokens(t) for t in predicted.get(user_id, [])]
        if not pred_spans:
            missing_predictions.append(user_id)
            user_values = [0.0] * len(gold_spans)
        else:
            user_values = [
                max(
                    greedy_similarity(pred, ref, provider).recall
                    for pred in pred_spans
                )
                for ref in gold_spans
            ]
        span_recalls.extend(user_values)
        user_recall_means.append(_mean(user_values))

    for user_id in predicted:
        pred_texts = predicted[user_id]
        if not pred_texts:
            continue
        gold_spans = [similarity_tokens(t) for t in gold.get(user_id, [])]
        if not gold_spans:
            missing_gold.append(user_id)
            user_values = [0.0] * len(pred_texts)
        else:
            user_values = [
                max(
                    greedy_similarity(similarity_tokens(text), ref, provider).precision
                    for ref in gold_spans
                )
                for text in pred_texts
            ]
        span_precisions.extend(user_values)
        user_precision_means.append(_mean(user_values))

    if missing_predictions:
        logger.warning(
            "no predicted highlights for %d gold user(s): %s",
            len(missing_predictions),
            ", ".join(sorted(missing_predictions)),
        )
    if missing_gold:
        logger.warning(
            "no gold highlights for %d predicted user(s): %s",
            len(missing_gold),
            ", ".join(sorted(missing_gold)),
        )
    return EvaluationReport(
        recall=_mean(span_recalls),
        precision=_mean(span_precisions),
        recall_user_mean=_mean(user_recall_means),
        precision_user_mean=_mean(user_precision_means),
        n_gold_spans=len(span_recalls),
        n_predicted_spans=len(span_precisions),
        users_without_predictions=tuple(sorted(missing_predictions)),
        users_without_gold=tuple(sorted(missing_gold)),
    )


@dataclass(frozen=True)
class Quartiles:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.minimum, self.q1, self.median, self.q3, self.maximum)


@dataclass(frozen=True)
class LevelRatioRow:
    level: RiskLevel
    n_users: int
    quartiles: Quartiles


@dataclass(frozen=True)
class LevelRatioStats:
    metric: str  # "risk" or "negative_sentiment"
    rows: tuple[LevelRatioRow, ...]

    def quartiles_for(self, level: RiskLevel) -> Quartiles:
        for row in self.rows:
            if row.level is level:
                return row.quartiles
        raise KeyError(level.value)


_LEVEL_ORDER = (RiskLevel.LOW, RiskLevel.MODERATE, RiskLevel.HIGH, RiskLevel.UNKNOWN)


def _quartiles(values: Sequence[float]) -> Quartiles:
    points = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100])
    return Quartiles(*(float(p) for p in points))


def risk_ratio_analysis(
    corpus: Sequence[UserTimeline],
    risk_scorer: RiskScorer,
    sentiment_scorer: SentimentScorer,
    threshold: float = 0.5,
) -> tuple[LevelRatioStats, LevelRatioStats]:
    """Per-level quartiles of per-user risk-positive and
    negative-dominant sentence ratios.

    A sentence counts as negative-dominant when p_negative is at least
    as large as both other probabilities. Users with zero sentences are
    excluded and logged.
    """
    risk_ratios: dict[RiskLevel, list[float]] = {level: [] for level in _LEVEL_ORDER}
    negative_ratios: dict[RiskLevel, list[float]] = {
        level: [] for level in _LEVEL_ORDER
    }
    skipped: list[str] = []
    for timeline in corpus:
        sentences = timeline_sentences(timeline)
        if not sentences:
            skipped.append(timeline.user_id)
            continue
        scored = score_sentences(risk_scorer, sentiment_scorer, sentences, threshold)
        n = len(scored)
        n_risk = sum(1 for item in scored if item.risk_positive)
        n_negative = sum(
            1
            for item in scored
            if item.sentiment.p_negative
            >= max(item.sentiment.p_neutral, item.sentiment.p_positive)
        )
        risk_ratios[timeline.expert_level].append(n_risk / n)
        negative_ratios[timeline.expert_level].append(n_negative / n)
    if skipped:
        logger.warning(
            "excluded %d user(s) with no sentences: %s",
            len(skipped),
            ", ".join(sorted(skipped)),
        )

    def stats(metric: str, ratios: dict[RiskLevel, list[float]]) -> LevelRatioStats:
        rows = tuple(
            LevelRatioRow(level, len(values), _quartiles(values))
            for level in _LEVEL_ORDER
            for values in [ratios[level]]
            if values
        )
        return LevelRatioStats(metric=metric, rows=rows)

    return stats("risk", risk_ratios), stats("negative_sentiment", negative_ratios)


@dataclass(frozen=True)
class SpanMeasure:
    """Per-span inputs to the precision correlation: model probabilities
    and the span's evaluation precision."""

    p_risk: float
    p_negative: float
    precision: float

    def __post_init__(self) -> None:
        for name in ("p_risk", "p_negative", "precision"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class PrecisionCorrelationRow:
    precision_low: float
    precision_high: float
    n: int
    mean_risk_prob: float | None
    mean_negative_prob: float | None
    frac_risk_above_0_9: float | None
    frac_negative_above_0_9: float | None


def precision_correlation_analysis(
    spans: Sequence[SpanMeasure], n_bins: int = 5
) -> list[PrecisionCorrelationRow]:
    """Bucket spans by precision and summarize probabilities per bucket.

    Bins partition [0, 1] evenly; every bin is half-open except the last,
    which includes 1.0. Empty bins carry n=0 and null summaries.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    rows: list[PrecisionCorrelationRow] = []
    for i in range(n_bins):
        low, high = float(edges[i]), float(edges[i + 1])
        if i == n_bins - 1:
            bucket = [s for s in spans if low <= s.precision <= high]
        else:
            bucket = [s for s in spans if low <= s.precision < high]
        if bucket:
            risk = [s.p_risk for s in bucket]
            negative = [s.p_negative for s in bucket]
            rows.append(
                PrecisionCorrelationRow(
                    precision_low=low,
                    precision_high=high,
                    n=len(bucket),
                    mean_risk_prob=_mean(risk),
                    mean_negative_prob=_mean(negative),
                    frac_risk_above_0_9=_mean([float(p >= 0.9) for p in risk]),
                    frac_negative_above_0_9=_mean(
                        [float(p >= 0.9) for p in negative]
                    ),
                )
            )
        else:
            rows.append(
                PrecisionCorrelationRow(low, high, 0, None, None, None, None)
            )
    return rows
