"""Scorer contract, baseline training, and remote client tests."""

from __future__ import annotations

import json

import pytest
import requests
from hypothesis import given, settings
from hypothesis import strategies as st

from risksum.corpus import Sentence
from risksum.lexicon import LabeledDataset, LabeledExample
from risksum.scoring import (
    BaselineRiskModel,
    LexiconBaselineRiskScorer,
    RemoteModelClient,
    RemoteProtocolError,
    RemoteServiceError,
    RemoteTimeoutError,
    ScoringError,
    SentimentScore,
    ValenceSentimentBaseline,
    char_ngram_counts,
    score_risk,
    score_sentences,
    score_sentiment,
    train_baseline,
)


def sentences(*texts: str) -> list[Sentence]:
    return [Sentence("p", i, t, 0, len(t)) for i, t in enumerate(texts)]


def separable_dataset(n_train: int = 16, n_val: int = 8) -> LabeledDataset:
    def rows(n, offset):
        out = []
        for i in range(n):
            if i % 2 == 0:
                out.append(LabeledExample(f"thinking about suicide case {i + offset}", 1))
            else:
                out.append(LabeledExample(f"the weather was fine on day {i + offset}", 0))
        return tuple(out)

    return LabeledDataset(train=rows(n_train, 0), val=rows(n_val, 100), seed=0)


class TestCharNgrams:
    def test_counts_and_sizes(self):
        counts = char_ngram_counts("abcd", sizes=(3,))
        assert counts == {"abc": 1, "bcd": 1}

    def test_short_text_has_no_ngrams(self):
        assert char_ngram_counts("ab", sizes=(3, 4, 5)) == {}

    def test_lowercased(self):
        assert char_ngram_counts("ABC", sizes=(3,)) == {"abc": 1}

    def test_repeats_counted(self):
        assert char_ngram_counts("aaaa", sizes=(3,)) == {"aaa": 2}


class TestLexiconBaseline:
    def test_dictionary_hit_forces_one(self):
        scorer = LexiconBaselineRiskScorer()
        assert scorer.risk_probabilities(["I want to die"]) == [1.0]

    def test_no_model_fallback_is_zero(self):
        scorer = LexiconBaselineRiskScorer()
        assert scorer.risk_probabilities(["The weather is nice"]) == [0.0]

    def test_model_fallback_used_when_no_hit(self):
        model = train_baseline(separable_dataset(), epochs=10, seed=1)
        scorer = LexiconBaselineRiskScorer(model=model)
        (p,) = scorer.risk_probabilities(["The weather is nice"])
        assert p == model.predict_probability("The weather is nice")

    @given(st.text(max_size=40))
    @settings(max_examples=60)
    def test_appending_a_phrase_never_decreases_risk(self, text):
        scorer = LexiconBaselineRiskScorer()
        (before,) = scorer.risk_probabilities([text])
        (after,) = scorer.risk_probabilities([text + " want to die"])
        assert after >= before
        assert after == 1.0


class TestValenceBaseline:
    def test_neutral_word_is_neutral(self):
        baseline = ValenceSentimentBaseline.default()
        (dist,) = baseline.sentiment_distributions(["table"])
        assert dist[1] == max(dist)

    def test_negative_sentence_leans_negative(self):
        baseline = ValenceSentimentBaseline.default()
        (dist,) = baseline.sentiment_distributions(["I am so sad and hopeless"])
        assert dist[0] > dist[2]

    def test_positive_words_raise_p_positive(self):
        baseline = ValenceSentimentBaseline.default()
        (dist,) = baseline.sentiment_distributions(["happy happy good good"])
        assert dist[2] == max(dist)

    @given(st.text(max_size=80))
    @settings(max_examples=100)
    def test_distribution_is_a_simplex(self, text):
        baseline = ValenceSentimentBaseline.default()
        (dist,) = baseline.sentiment_distributions([text])
        assert all(0.0 <= p <= 1.0 for p in dist)
        assert abs(sum(dist) - 1.0) < 1e-6


class TestScoreFunctions:
    def test_empty_input_empty_output(self):
        scorer = LexiconBaselineRiskScorer()
        assert score_risk(scorer, []) == []
        assert score_sentiment(ValenceSentimentBaseline.default(), []) == []

    def test_order_preserved(self):
        scorer = LexiconBaselineRiskScorer()
        scores = score_risk(scorer, sentences("want to die", "fine day"))
        assert [s.p_risk for s in scores] == [1.0, 0.0]

    def test_misaligned_scorer_rejected(self):
        class Broken:
            def risk_probabilities(self, texts):
                return [0.5]

        with pytest.raises(ScoringError, match="returned 1 scores for 2"):
            score_risk(Broken(), sentences("a", "b"))

    def test_out_of_bounds_probability_rejected(self):
        class Broken:
            def risk_probabilities(self, texts):
                return [1.5]

        with pytest.raises(ScoringError, match="outside"):
            score_risk(Broken(), sentences("a"))

    def test_bad_simplex_rejected(self):
        class Broken:
            def sentiment_distributions(self, texts):
                return [(0.5, 0.5, 0.5)]

        with pytest.raises(ScoringError, match="sums to"):
            score_sentiment(Broken(), sentences("a"))

    def test_wrong_arity_rejected(self):
        class Broken:
            def sentiment_distributions(self, texts):
                return [(1.0, 0.0)]

        with pytest.raises(ScoringError, match="not 3-way"):
            score_sentiment(Broken(), sentences("a"))

    def test_threshold_consistency(self):
        scored = score_sentences(
            LexiconBaselineRiskScorer(),
            ValenceSentimentBaseline.default(),
            sentences("I want to die", "nice walk today"),
            threshold=0.5,
        )
        for item in scored:
            assert item.risk_positive == (item.risk.p_risk >= 0.5)
        assert [s.risk_positive for s in scored] == [True, False]

    def test_sentiment_score_tuple(self):
        score = SentimentScore(0.2, 0.3, 0.5)
        assert score.as_tuple() == (0.2, 0.3, 0.5)


class TestTrainBaseline:
    def test_separable_dataset_reaches_perfect_val(self):
        model = train_baseline(separable_dataset(), epochs=15, seed=3)
        correct = sum(
            (model.predict_probability(r.text) >= 0.5) == bool(r.label)
            for r in separable_dataset().val
        )
        assert correct == len(separable_dataset().val)
        assert model.trained

    def test_returned_model_is_best_epoch(self):
        dataset = separable_dataset()
        model = train_baseline(dataset, epochs=15, seed=3)
        best_recorded = max(m.val_accuracy for m in model.history)
        measured = sum(
            (model.predict_probability(r.text) >= 0.5) == bool(r.label)
            for r in dataset.val
        ) / len(dataset.val)
        assert measured == best_recorded

    def test_history_covers_every_epoch(self):
        model = train_baseline(separable_dataset(), epochs=7, seed=0)
        assert [m.epoch for m in model.history] == list(range(1, 8))

    def test_zero_epochs_rejected(self):
        with pytest.raises(ValueError, match="epochs must be positive"):
            train_baseline(separable_dataset(), epochs=0)

    def test_single_class_rejected(self):
        rows = tuple(LabeledExample(f"text {i}", 1) for i in range(4))
        dataset = LabeledDataset(train=rows, val=rows, seed=0)
        with pytest.raises(ValueError, match="both classes"):
            train_baseline(dataset, epochs=1)

    def test_empty_val_rejected(self):
        rows = (LabeledExample("a", 0), LabeledExample("b", 1))
        dataset = LabeledDataset(train=rows, val=(), seed=0)
        with pytest.raises(ValueError, match="non-empty train and val"):
            train_baseline(dataset, epochs=1)

    def test_deterministic_given_seed(self):
        a = train_baseline(separable_dataset(), epochs=5, seed=9)
        b = train_baseline(separable_dataset(), epochs=5, seed=9)
        assert a.weights == b.weights and a.bias == b.bias

    def test_save_load_is_bit_exact(self, tmp_path):
        model = train_baseline(separable_dataset(), epochs=5, seed=2)
        path = tmp_path / "model.txt"
        model.save(path)
        loaded = BaselineRiskModel.load(path)
        for text in ("suicide case", "fine day", "", "unrelated words"):
            assert loaded.predict_probability(text) == model.predict_probability(text)
        again = tmp_path / "model2.txt"
        loaded.save(again)
        assert again.read_bytes() == path.read_bytes()

    def test_load_rejects_other_files(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("hello\n", encoding="utf-8")
        with pytest.raises(ScoringError, match="not a baseline model"):
            BaselineRiskModel.load(path)


class FakeResponse:
    def __init__(self, status_code=200, payload=None, text=""):
        self.status_code = status_code
        self._payload = payload
        self.text = text

    def json(self):
        if self._payload is None:
            raise ValueError("no json")
        return self._payload


class FakeSession:
    """Scripted stand-in for requests.Session."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def post(self, url, json=None, timeout=None):
        self.calls.append((url, json))
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def make_client(responses, batch_size=32):
    client = RemoteModelClient("http://svc:8000", batch_size=batch_size)
    session = FakeSession(responses)
    client._session = session
    return client, session


class TestRemoteModelClient:
    def test_risk_scores_flow_through(self):
        client, session = make_client(
            [FakeResponse(payload={"v": 1, "probs": [0.9, 0.1]})]
        )
        assert client.risk_probabilities(["a", "b"]) == [0.9, 0.1]
        url, body = session.calls[0]
        assert url == "http://svc:8000/score/risk"
        assert body == {"v": 1, "texts": ["a", "b"]}

    def test_batching_splits_requests(self):
        client, session = make_client(
            [
                FakeResponse(payload={"v": 1, "probs": [0.1, 0.2]}),
                FakeResponse(payload={"v": 1, "probs": [0.3]}),
            ],
            batch_size=2,
        )
        assert client.risk_probabilities(["a", "b", "c"]) == [0.1, 0.2, 0.3]
        assert len(session.calls) == 2

    def test_sentiment_distributions(self):
        client, _ = make_client(
            [FakeResponse(payload={"v": 1, "dists": [[0.7, 0.2, 0.1]]})]
        )
        assert client.sentiment_distributions(["x"]) == [(0.7, 0.2, 0.1)]

    def test_non_200_is_protocol_error(self):
        client, _ = make_client([FakeResponse(status_code=503, text="down")])
        with pytest.raises(RemoteProtocolError, match="HTTP 503"):
            client.risk_probabilities(["a"])

    def test_timeout_is_distinguished(self):
        client, _ = make_client([requests.Timeout("slow")])
        with pytest.raises(RemoteTimeoutError):
            client.risk_probabilities(["a"])

    def test_connection_error_is_service_error(self):
        client, _ = make_client([requests.ConnectionError("refused")])
        with pytest.raises(RemoteServiceError):
            client.risk_probabilities(["a"])

    def test_version_mismatch_rejected(self):
        client, _ = make_client([FakeResponse(payload={"v": 2, "probs": [0.5]})])
        with pytest.raises(RemoteProtocolError, match="schema version"):
            client.risk_probabilities(["a"])

    def test_misaligned_response_rejected(self):
        client, _ = make_client([FakeResponse(payload={"v": 1, "probs": [0.5]})])
        with pytest.raises(RemoteProtocolError, match="for 2 texts"):
            client.risk_probabilities(["a", "b"])

    def test_non_json_rejected(self):
        client, _ = make_client([FakeResponse(payload=None, text="<html>")])
        with pytest.raises(RemoteProtocolError, match="not JSON"):
            client.risk_probabilities(["a"])

    def test_generate_terms_returns_raw_output(self):
        client, session = make_client(
            [FakeResponse(payload={"v": 1, "raw_output": "* want to die"})]
        )
        assert client.generate_terms("posts") == "* want to die"
        assert session.calls[0][0] == "http://svc:8000/generate/terms"

    def test_generate_summary(self):
        client, _ = make_client([FakeResponse(payload={"v": 1, "summary": "S."})])
        assert client.generate_summary("posts") == "S."
