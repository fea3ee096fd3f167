"""Sentence scorers: risk probability and sentiment distribution.

Two scorer families implement the same small contracts. The native
baselines run with no model downloads (character n-gram logistic
regression for risk, a valence word list for sentiment) and exist for
plumbing and offline runs. The remote client speaks the HTTP JSON
protocol of the companion model service and satisfies the same
contracts, so pipelines swap backends through configuration alone.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Protocol, Sequence

import requests

from risksum.corpus import Sentence
from risksum.lexicon import (
    LabeledDataset,
    RiskPhraseLexicon,
    default_risk_lexicon,
    match_risk_phrases,
)

SIMPLEX_TOLERANCE = 1e-6
DEFAULT_RISK_THRESHOLD = 0.5

_MODEL_MAGIC = "risksum-baseline-v1"
_TOKEN_RE = re.compile(r"[^\W_]+")


class ScoringError(ValueError):
    """Raised when a scorer returns out-of-contract values."""


class RemoteServiceError(RuntimeError):
    """Base error for remote scorer transport and protocol failures."""


class RemoteTimeoutError(RemoteServiceError):
    pass


class RemoteProtocolError(RemoteServiceError):
    pass


@dataclass(frozen=True)
class RiskScore:
    p_risk: float


@dataclass(frozen=True)
class SentimentScore:
    p_negative: float
    p_neutral: float
    p_positive: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_negative, self.p_neutral, self.p_positive)


@dataclass(frozen=True)
class ScoredSentence:
    sentence: Sentence
    risk: RiskScore
    sentiment: SentimentScore
    risk_positive: bool


class RiskScorer(Protocol):
    def risk_probabilities(self, texts: Sequence[str]) -> list[float]: ...


class SentimentScorer(Protocol):
    def sentiment_distributions(
        self, texts: Sequence[str]
    ) -> list[tuple[float, float, float]]: ...


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def _tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def char_ngram_counts(text: str, sizes: Sequence[int] = (3, 4, 5)) -> dict[str, int]:
    """Counts of character n-grams over the lowercased text."""
    lowered = text.lower()
    counts: dict[str, int] = {}
    for size in sizes:
        for i in range(len(lowered) - size + 1):
            gram = lowered[i : i + size]
            counts[gram] = counts.get(gram, 0) + 1
    return counts


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_accuracy: float
    val_accuracy: float


@dataclass
class BaselineRiskModel:
    """Logistic regression over character n-gram counts.

    Inference is deterministic; persistence round-trips weights through
    ``repr`` so a reloaded model scores bit-identically.
    """

    weights: dict[str, float] = field(default_factory=dict)
    bias: float = 0.0
    ngram_sizes: tuple[int, ...] = (3, 4, 5)
    trained: bool = False
    history: tuple[EpochMetrics, ...] = ()

    def predict_probability(self, text: str) -> float:
        z = self.bias
        for gram, count in char_ngram_counts(text, self.ngram_sizes).items():
            weight = self.weights.get(gram)
            if weight is not None:
                z += weight * count
        return _sigmoid(z)

    def risk_probabilities(self, texts: Sequence[str]) -> list[float]:
        return [self.predict_probability(text) for text in texts]

    def save(self, path: str | Path) -> None:
        path = Path(path)
        lines = [
            _MODEL_MAGIC,
            "sizes\t" + ",".join(str(s) for s in self.ngram_sizes),
            "bias\t" + repr(self.bias),
            "count\t" + str(len(self.weights)),
        ]
        for gram in sorted(self.weights):
            lines.append(json.dumps(gram, ensure_ascii=False) + "\t" + repr(self.weights[gram]))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "BaselineRiskModel":
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != _MODEL_MAGIC:
            raise ScoringError(f"{path}: not a baseline model file")
        header: dict[str, str] = {}
        for line in lines[1:4]:
            key, _, value = line.partition("\t")
            header[key] = value
        try:
            sizes = tuple(int(s) for s in header["sizes"].split(","))
            bias = float(header["bias"])
            count = int(header["count"])
        except (KeyError, ValueError) as exc:
            raise ScoringError(f"{path}: malformed model header") from exc
        weights: dict[str, float] = {}
        for line in lines[4 : 4 + count]:
            raw_gram, _, raw_weight = line.rpartition("\t")
            weights[json.loads(raw_gram)] = float(raw_weight)
        if len(weights) != count:
            raise ScoringError(f"{path}: expected {count} weights, found {len(weights)}")
        return cls(weights=weights, bias=bias, ngram_sizes=sizes, trained=True)


def _accuracy(model: BaselineRiskModel, rows) -> float:
    correct = sum(
        1
        for row in rows
        if (model.predict_probability(row.text) >= 0.5) == bool(row.label)
    )
    return correct / len(rows)


def train_baseline(
    dataset: LabeledDataset,
    epochs: int = 20,
    learning_rate: float = 0.1,
    seed: int = 0,
    ngram_sizes: Sequence[int] = (3, 4, 5),
) -> BaselineRiskModel:
    """SGD logistic regression; returns the epoch snapshot with the best
    validation accuracy (earliest epoch wins ties)."""
    if epochs <= 0:
        raise ValueError("epochs must be positive; zero epochs trains nothing")
    if not dataset.train or not dataset.val:
        raise ValueError("dataset needs non-empty train and val splits")
    labels = {row.label for row in dataset.train}
    if labels != {0, 1}:
        raise ValueError("training split must contain both classes")

    sizes = tuple(ngram_sizes)
    features = [char_ngram_counts(row.text, sizes) for row in dataset.train]
    targets = [row.label for row in dataset.train]

    model = BaselineRiskModel(ngram_sizes=sizes)
    rng = random.Random(seed)
    order = list(range(len(features)))
    best: tuple[float, dict[str, float], float] | None = None
    history: list[EpochMetrics] = []
    for epoch in range(1, epochs + 1):
        rng.shuffle(order)
        for i in order:
            z = model.bias
            counts = features[i]
            for gram, count in counts.items():
                z += model.weights.get(gram, 0.0) * count
            gradient = _sigmoid(z) - targets[i]
            step = learning_rate * gradient
            for gram, count in counts.items():
                model.weights[gram] = model.weights.get(gram, 0.0) - step * count
            model.bias -= step
        metrics = EpochMetrics(
            epoch=epoch,
            train_accuracy=_accuracy(model, dataset.train),
            val_accuracy=_accuracy(model, dataset.val),
        )
        history.append(metrics)
        if best is None or metrics.val_accuracy > best[0]:
            best = (metrics.val_accuracy, dict(model.weights), model.bias)

    assert best is not None
    return BaselineRiskModel(
        weights=best[1],
        bias=best[2],
        ngram_sizes=sizes,
        trained=True,
        history=tuple(history),
    )


@dataclass
class LexiconBaselineRiskScorer:
    """Dictionary hit forces p_risk to 1.0; otherwise fall back to the
    trained n-gram model when present, else 0.0."""

    lexicon: RiskPhraseLexicon | None = None
    model: BaselineRiskModel | None = None

    def risk_probabilities(self, texts: Sequence[str]) -> list[float]:
        lexicon = self.lexicon if self.lexicon is not None else default_risk_lexicon()
        out: list[float] = []
        for text in texts:
            if match_risk_phrases(text, lexicon):
                out.append(1.0)
            elif self.model is not None:
                out.append(self.model.predict_probability(text))
            else:
                out.append(0.0)
        return out


def _load_word_list(name: str) -> frozenset[str]:
    text = resources.files("risksum.data").joinpath(name).read_text(encoding="utf-8")
    return frozenset(
        line.strip().lower() for line in text.splitlines() if line.strip()
    )


@dataclass(frozen=True)
class ValenceSentimentBaseline:
    """Sentiment from valence word fractions.

    p_negative squashes the negative-token fraction through a fixed
    logistic curve; the remainder is split between positive and neutral
    by the positive-token fraction, so the three always sum to one.
    """

    negative_words: frozenset[str]
    positive_words: frozenset[str]
    slope: float = 8.0
    intercept: float = -2.0

    @classmethod
    def default(cls) -> "ValenceSentimentBaseline":
        return cls(
            negative_words=_load_word_list("valence_negative.txt"),
            positive_words=_load_word_list("valence_positive.txt"),
        )

    def sentiment_distributions(
        self, texts: Sequence[str]
    ) -> list[tuple[float, float, float]]:
        out: list[tuple[float, float, float]] = []
        for text in texts:
            tokens = _tokenize(text)
            if tokens:
                f_negative = sum(t in self.negative_words for t in tokens) / len(tokens)
                f_positive = sum(t in self.positive_words for t in tokens) / len(tokens)
            else:
                f_negative = f_positive = 0.0
            p_negative = _sigmoid(self.slope * f_negative + self.intercept)
            p_positive = (1.0 - p_negative) * f_positive
            p_neutral = 1.0 - p_negative - p_positive
            out.append((p_negative, p_neutral, p_positive))
        return out


def score_risk(scorer: RiskScorer, sentences: Sequence[Sentence]) -> list[RiskScore]:
    """One risk score per sentence, order preserved."""
    if not sentences:
        return []
    probs = scorer.risk_probabilities([s.text for s in sentences])
    if len(probs) != len(sentences):
        raise ScoringError(
            f"scorer returned {len(probs)} scores for {len(sentences)} sentences"
        )
    for p in probs:
        if not (0.0 <= p <= 1.0) or math.isnan(p):
            raise ScoringError(f"risk probability {p!r} outside [0, 1]")
    return [RiskScore(p) for p in probs]


def score_sentiment(
    scorer: SentimentScorer, sentences: Sequence[Sentence]
) -> list[SentimentScore]:
    """One sentiment distribution per sentence, simplex-checked."""
    if not sentences:
        return []
    dists = scorer.sentiment_distributions([s.text for s in sentences])
    if len(dists) != len(sentences):
        raise ScoringError(
            f"scorer returned {len(dists)} distributions for {len(sentences)} sentences"
        )
    out: list[SentimentScore] = []
    for dist in dists:
        if len(dist) != 3:
            raise ScoringError(f"sentiment distribution {dist!r} is not 3-way")
        if any(not (0.0 <= p <= 1.0) or math.isnan(p) for p in dist):
            raise ScoringError(f"sentiment probability outside [0, 1]: {dist!r}")
        if abs(sum(dist) - 1.0) > SIMPLEX_TOLERANCE:
            raise ScoringError(f"sentiment distribution sums to {sum(dist)!r}, not 1")
        out.append(SentimentScore(*dist))
    return out


def score_sentences(
    risk_scorer: RiskScorer,
    sentiment_scorer: SentimentScorer,
    sentences: Sequence[Sentence],
    threshold: float = DEFAULT_RISK_THRESHOLD,
) -> list[ScoredSentence]:
    risks = score_risk(risk_scorer, sentences)
    sentiments = score_sentiment(sentiment_scorer, sentences)
    return [
        ScoredSentence(
            sentence=sentence,
            risk=risk,
            sentiment=sentiment,
            risk_positive=risk.p_risk >= threshold,
        )
        for sentence, risk, sentiment in zip(sentences, risks, sentiments)
    ]


@dataclass
class RemoteModelClient:
    """Client for the companion HTTP model service (schema version 1).

    Satisfies both scorer contracts and exposes the two generator calls.
    Requests are sent in batches of ``batch_size`` texts.
    """

    endpoint: str
    timeout: float = 10.0
    batch_size: int = 32
    _session: requests.Session | None = field(default=None, repr=False)

    def _post(self, route: str, payload: dict) -> dict:
        if self._session is None:
            self._session = requests.Session()
        url = self.endpoint.rstrip("/") + route
        body = {"v": 1, **payload}
        try:
            response = self._session.post(url, json=body, timeout=self.timeout)
        except requests.Timeout as exc:
            raise RemoteTimeoutError(f"{url}: timed out after {self.timeout}s") from exc
        except requests.RequestException as exc:
            raise RemoteServiceError(f"{url}: {exc}") from exc
        if response.status_code != 200:
            raise RemoteProtocolError(
                f"{url}: HTTP {response.status_code}: {response.text[:200]}"
            )
        try:
            data = response.json()
        except ValueError as exc:
            raise RemoteProtocolError(f"{url}: response is not JSON") from exc
        if not isinstance(data, dict) or data.get("v") != 1:
            raise RemoteProtocolError(f"{url}: unsupported schema version {data!r}")
        return data

    def _batches(self, texts: Sequence[str]):
        for i in range(0, len(texts), self.batch_size):
            yield list(texts[i : i + self.batch_size])

    def risk_probabilities(self, texts: Sequence[str]) -> list[float]:
        out: list[float] = []
        for batch in self._batches(texts):
            data = self._post("/score/risk", {"texts": batch})
            probs = data.get("probs")
            if not isinstance(probs, list) or len(probs) != len(batch):
                raise RemoteProtocolError(
                    f"/score/risk returned {probs!r} for {len(batch)} texts"
                )
            out.extend(float(p) for p in probs)
        return out

    def sentiment_distributions(
        self, texts: Sequence[str]
    ) -> list[tuple[float, float, float]]:
        out: list[tuple[float, float, float]] = []
        for batch in self._batches(texts):
            data = self._post("/score/sentiment", {"texts": batch})
            dists = data.get("dists")
            if not isinstance(dists, list) or len(dists) != len(batch):
                raise RemoteProtocolError(
                    f"/score/sentiment returned {dists!r} for {len(batch)} texts"
                )
            for dist in dists:
                if not isinstance(dist, list) or len(dist) != 3:
                    raise RemoteProtocolError(f"malformed distribution {dist!r}")
                out.append((float(dist[0]), float(dist[1]), float(dist[2])))
        return out

    def generate_terms(self, posts_text: str) -> str:
        data = self._post("/generate/terms", {"posts_text": posts_text})
        raw = data.get("raw_output")
        if not isinstance(raw, str):
            raise RemoteProtocolError(f"/generate/terms returned {raw!r}")
        return raw

    def generate_summary(self, posts_text: str) -> str:
        data = self._post("/generate/summary", {"posts_text": posts_text})
        summary = data.get("summary")
        if not isinstance(summary, str):
            raise RemoteProtocolError(f"/generate/summary returned {summary!r}")
        return summary


TermProvider = Callable[[str], str]
