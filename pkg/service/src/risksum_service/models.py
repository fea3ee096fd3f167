"""Model loading and inference for the serving process.

A bundle owns up to three models: a two-class risk classifier, a
three-class sentiment classifier, and a causal language model for term
extraction and summarisation. Which checkpoints back them is pure
configuration; a capability whose identifier is unset simply stays
unloaded and the endpoint reports that. Requests of any size are cut
into bounded batches internally, and a lock serialises access to the
shared weights so concurrent requests are safe.
"""

from __future__ import annotations

import logging
import threading

import torch

from risksum_service.config import ServiceConfig

logger = logging.getLogger(__name__)

TERMS_PROMPT = (
    "The text below implies a risk of suicide. Extract only the necessary "
    "and sufficient phrases and keywords indicating the risk exactly as "
    "they appear in the original text. Present the extracted words in a "
    "list format, separated by commas."
)
SUMMARY_PROMPT = "Please summarize the next post in 300 words"

_SENTIMENT_ORDER = ("negative", "neutral", "positive")


class ModelError(RuntimeError):
    pass


def _encoder_max_length(tokenizer, model) -> int:
    length = getattr(tokenizer, "model_max_length", None)
    if length is None or length > 1_000_000:
        length = getattr(model.config, "max_position_embeddings", 512)
    return int(length)


def _sentiment_permutation(model) -> tuple[int, int, int]:
    """Map model label indices to (negative, neutral, positive) order."""
    id2label = getattr(model.config, "id2label", None) or {}
    by_name = {str(name).lower(): int(idx) for idx, name in id2label.items()}
    if all(name in by_name for name in _SENTIMENT_ORDER):
        return tuple(by_name[name] for name in _SENTIMENT_ORDER)
    return (0, 1, 2)


class ModelBundle:
    """Loaded models plus the tokenizers and locks that go with them."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._lock = threading.Lock()
        self._risk = None
        self._risk_tokenizer = None
        self._sentiment = None
        self._sentiment_tokenizer = None
        self._sentiment_permutation = (0, 1, 2)
        self._generator = None
        self._generator_tokenizer = None

    # -- loading ---------------------------------------------------------

    def load(self) -> None:
        from transformers import (
            AutoModelForCausalLM,
            AutoModelForSequenceClassification,
            AutoTokenizer,
        )

        device = torch.device(self.config.device)
        if self.config.risk_model is not None:
            logger.info("loading risk model %s", self.config.risk_model)
            self._risk_tokenizer = AutoTokenizer.from_pretrained(
                self.config.risk_model
            )
            self._risk = AutoModelForSequenceClassification.from_pretrained(
                self.config.risk_model
            )
            self._risk.to(device)
            self._risk.eval()
        if self.config.sentiment_model is not None:
            logger.info("loading sentiment model %s", self.config.sentiment_model)
            self._sentiment_tokenizer = AutoTokenizer.from_pretrained(
                self.config.sentiment_model
            )
            self._sentiment = AutoModelForSequenceClassification.from_pretrained(
                self.config.sentiment_model
            )
            if self._sentiment.config.num_labels != 3:
                raise ModelError(
                    "sentiment model must have exactly 3 labels, got "
                    f"{self._sentiment.config.num_labels}"
                )
            self._sentiment.to(device)
            self._sentiment.eval()
            self._sentiment_permutation = _sentiment_permutation(self._sentiment)
        if self.config.generator_model is not None:
            logger.info("loading generator model %s", self.config.generator_model)
            self._generator_tokenizer = AutoTokenizer.from_pretrained(
                self.config.generator_model
            )
            self._generator = AutoModelForCausalLM.from_pretrained(
                self.config.generator_model
            )
            self._generator.to(device)
            self._generator.eval()

    @property
    def risk_loaded(self) -> bool:
        return self._risk is not None

    @property
    def sentiment_loaded(self) -> bool:
        return self._sentiment is not None

    @property
    def generator_loaded(self) -> bool:
        return self._generator is not None

    # -- classification --------------------------------------------------

    def _classify(
        self, model, tokenizer, texts: list[str]
    ) -> tuple[list[list[float]], list[bool]]:
        device = torch.device(self.config.device)
        max_length = _encoder_max_length(tokenizer, model)
        all_probs: list[list[float]] = []
        truncated: list[bool] = []
        step = self.config.max_batch_size
        with self._lock, torch.no_grad():
            for start in range(0, len(texts), step):
                chunk = texts[start : start + step]
                full = tokenizer(chunk, padding=False, truncation=False)
                encoded = tokenizer(
                    chunk,
                    padding=True,
                    truncation=True,
                    max_length=max_length,
                    return_tensors="pt",
                ).to(device)
                probs = torch.softmax(model(**encoded).logits, dim=-1)
                all_probs.extend(probs.cpu().tolist())
                truncated.extend(
                    len(ids) > max_length for ids in full["input_ids"]
                )
        return all_probs, truncated

    def risk_probabilities(
        self, texts: list[str]
    ) -> tuple[list[float], list[bool]]:
        """Probability of the positive (risk) class for each text."""
        if self._risk is None:
            raise ModelError("risk model not loaded")
        probs, truncated = self._classify(
            self._risk, self._risk_tokenizer, texts
        )
        return [row[1] for row in probs], truncated

    def sentiment_distributions(
        self, texts: list[str]
    ) -> tuple[list[list[float]], list[bool]]:
        """[negative, neutral, positive] distribution for each text."""
        if self._sentiment is None:
            raise ModelError("sentiment model not loaded")
        probs, truncated = self._classify(
            self._sentiment, self._sentiment_tokenizer, texts
        )
        order = self._sentiment_permutation
        return [[row[i] for i in order] for row in probs], truncated

    # -- generation ------------------------------------------------------

    def generate(self, posts_text: str, prompt: str) -> tuple[str, int, bool]:
        """Run the generator on prompt + posts and decode the new tokens.

        Returns the decoded continuation, the number of new tokens, and
        whether the input had to be truncated to fit the model window.
        """
        if self._generator is None:
            raise ModelError("generator model not loaded")
        tokenizer = self._generator_tokenizer
        device = torch.device(self.config.device)
        generation = self.config.generation
        window = _encoder_max_length(tokenizer, self._generator)
        # leave room for the continuation inside the model window
        input_budget = min(
            generation.max_length - generation.max_new_tokens,
            window - generation.max_new_tokens,
        )
        if input_budget < 1:
            raise ModelError("max_new_tokens leaves no room for the prompt")
        text = prompt + "\n\n" + posts_text
        full = tokenizer(text, truncation=False)
        encoded = tokenizer(
            text,
            truncation=True,
            max_length=input_budget,
            return_tensors="pt",
        ).to(device)
        truncated = len(full["input_ids"]) > input_budget
        do_sample = generation.do_sample and not self.config.test_mode
        with self._lock, torch.no_grad():
            output = self._generator.generate(
                **encoded,
                max_new_tokens=generation.max_new_tokens,
                do_sample=do_sample,
                pad_token_id=(
                    tokenizer.pad_token_id
                    if tokenizer.pad_token_id is not None
                    else tokenizer.eos_token_id
                ),
            )
        new_tokens = output[0][encoded["input_ids"].shape[1] :]
        decoded = tokenizer.decode(new_tokens, skip_special_tokens=True)
        return decoded, int(new_tokens.shape[0]), truncated
