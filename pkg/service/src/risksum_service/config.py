"""Configuration types.

Model identifiers are configuration, not code: the defaults name public
checkpoints, and any local directory saved by the training entry point
works in their place.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

DEFAULT_RISK_MODEL = "bert-base-uncased"
DEFAULT_SENTIMENT_MODEL = "cardiffnlp/twitter-roberta-base-sentiment-latest"
DEFAULT_GENERATOR_MODEL = "klyang/MentaLLaMA-chat-7B"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrainingConfig:
    """Fine-tuning hyperparameters; defaults are the reference settings."""

    batch_size: int = 8
    learning_rate: float = 2e-5
    warmup_ratio: float = 0.1
    max_epochs: int = 50
    selection_metric: str = "accuracy"
    seed: int = 0
    # None -> the encoder's own maximum, with truncation
    max_sequence_length: int | None = None

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not 0.0 <= self.warmup_ratio <= 1.0:
            raise ConfigError("warmup_ratio must be in [0, 1]")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if self.selection_metric != "accuracy":
            raise ConfigError(
                f"unsupported selection metric {self.selection_metric!r}"
            )
        if self.max_sequence_length is not None and self.max_sequence_length < 8:
            raise ConfigError("max_sequence_length must be >= 8")


@dataclass(frozen=True)
class GenerationConfig:
    """Generator defaults; temperature and repetition penalty stay at the
    loaded model's own values on purpose."""

    max_length: int = 1024
    max_new_tokens: int = 128
    do_sample: bool = True

    def __post_init__(self) -> None:
        if self.max_length < 1:
            raise ConfigError("max_length must be >= 1")
        if self.max_new_tokens < 1:
            raise ConfigError("max_new_tokens must be >= 1")


@dataclass(frozen=True)
class ServiceConfig:
    """What the service loads and how it answers.

    A model identifier of None leaves that capability unloaded; its
    endpoints answer 503. ``test_mode`` disables sampling so repeated
    generation calls are deterministic; production keeps sampling on.
    """

    risk_model: str | None = DEFAULT_RISK_MODEL
    sentiment_model: str | None = DEFAULT_SENTIMENT_MODEL
    generator_model: str | None = DEFAULT_GENERATOR_MODEL
    device: str = "cpu"
    test_mode: bool = False
    max_batch_size: int = 32
    generation_timeout: float = 120.0
    generation: GenerationConfig = field(default_factory=GenerationConfig)

    def __post_init__(self) -> None:
        if self.max_batch_size < 1:
            raise ConfigError("max_batch_size must be >= 1")
        if self.generation_timeout <= 0:
            raise ConfigError("generation_timeout must be positive")

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]
