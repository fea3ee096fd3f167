"""Sentence-level risk evidence extraction and summary pipeline."""

from risksum.corpus import (
    COMMA_DELIMITERS,
    DEFAULT_DELIMITERS,
    CorpusError,
    Post,
    RiskLevel,
    Sentence,
    UserTimeline,
    load_corpus,
    segment_post,
    timeline_sentences,
)

__version__ = "0.1.0"

__all__ = [
    "COMMA_DELIMITERS",
    "DEFAULT_DELIMITERS",
    "CorpusError",
    "Post",
    "RiskLevel",
    "Sentence",
    "UserTimeline",
    "load_corpus",
    "segment_post",
    "timeline_sentences",
    "__version__",
]
