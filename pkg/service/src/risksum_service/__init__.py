"""HTTP model service: risk scoring, sentiment, and text generation."""

from risksum_service.config import (
    GenerationConfig,
    ServiceConfig,
    TrainingConfig,
)

__all__ = ["GenerationConfig", "ServiceConfig", "TrainingConfig"]
__version__ = "0.1.0"
