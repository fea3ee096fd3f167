"""HTTP surface of the model service.

All request and response bodies carry a top-level schema version ``v``;
the only accepted value is 1. Scoring endpoints take ``{"v": 1,
"texts": [...]}`` and answer with one entry per input text, in order.
Generation endpoints take ``{"v": 1, "posts_text": "..."}`` and answer
with the raw decoded continuation; no parsing is attempted here, the
caller owns interpretation. Empty inputs are a 400, a capability whose
model is not loaded is a 503, and a generation that outruns the
configured timeout is a 504.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from risksum_service.config import ServiceConfig
from risksum_service.models import SUMMARY_PROMPT, TERMS_PROMPT, ModelBundle

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class ScoreRequest(BaseModel):
    v: int
    texts: list[str]


class GenerateRequest(BaseModel):
    v: int
    posts_text: str


def _check_version(v: int) -> None:
    if v != SCHEMA_VERSION:
        raise HTTPException(
            status_code=400,
            detail=f"unsupported schema version {v}, expected {SCHEMA_VERSION}",
        )


def _check_texts(texts: list[str]) -> None:
    if not texts:
        raise HTTPException(status_code=400, detail="texts must not be empty")


def create_app(config: ServiceConfig, bundle: ModelBundle | None = None) -> FastAPI:
    """Build the application around a model bundle.

    When no bundle is passed, one is created from the config and loaded
    at startup; tests inject a pre-built bundle instead.
    """
    own_bundle = bundle is None
    if own_bundle:
        bundle = ModelBundle(config)

    # generation runs on a worker so the timeout can be enforced
    executor = ThreadPoolExecutor(max_workers=1)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if own_bundle:
            bundle.load()
        yield
        executor.shutdown(wait=False)

    app = FastAPI(title="risksum-service", lifespan=lifespan)

    def _generate(posts_text: str, prompt: str) -> tuple[str, int, bool]:
        if not bundle.generator_loaded:
            raise HTTPException(status_code=503, detail="generator model not loaded")
        if not posts_text.strip():
            raise HTTPException(
                status_code=400, detail="posts_text must not be empty"
            )
        future = executor.submit(bundle.generate, posts_text, prompt)
        try:
            return future.result(timeout=config.generation_timeout)
        except FutureTimeoutError:
            raise HTTPException(
                status_code=504,
                detail=f"generation exceeded {config.generation_timeout}s",
            ) from None

    @app.get("/health")
    def health() -> dict:
        return {
            "v": SCHEMA_VERSION,
            "status": "ok",
            "models": {
                "risk": config.risk_model,
                "sentiment": config.sentiment_model,
                "generator": config.generator_model,
            },
            "loaded": {
                "risk": bundle.risk_loaded,
                "sentiment": bundle.sentiment_loaded,
                "generator": bundle.generator_loaded,
            },
            "config_hash": config.config_hash,
        }

    @app.post("/score/risk")
    def score_risk(request: ScoreRequest) -> dict:
        _check_version(request.v)
        _check_texts(request.texts)
        if not bundle.risk_loaded:
            raise HTTPException(status_code=503, detail="risk model not loaded")
        probs, truncated = bundle.risk_probabilities(request.texts)
        return {"v": SCHEMA_VERSION, "probs": probs, "truncated": truncated}

    @app.post("/score/sentiment")
    def score_sentiment(request: ScoreRequest) -> dict:
        _check_version(request.v)
        _check_texts(request.texts)
        if not bundle.sentiment_loaded:
            raise HTTPException(
                status_code=503, detail="sentiment model not loaded"
            )
        dists, truncated = bundle.sentiment_distributions(request.texts)
        return {"v": SCHEMA_VERSION, "dists": dists, "truncated": truncated}

    @app.post("/generate/terms")
    def generate_terms(request: GenerateRequest) -> dict:
        _check_version(request.v)
        raw, n_new_tokens, truncated = _generate(request.posts_text, TERMS_PROMPT)
        return {
            "v": SCHEMA_VERSION,
            "raw_output": raw,
            "n_new_tokens": n_new_tokens,
            "truncated": truncated,
        }

    @app.post("/generate/summary")
    def generate_summary(request: GenerateRequest) -> dict:
        _check_version(request.v)
        summary, n_new_tokens, truncated = _generate(
            request.posts_text, SUMMARY_PROMPT
        )
        return {
            "v": SCHEMA_VERSION,
            "summary": summary,
            "n_new_tokens": n_new_tokens,
            "truncated": truncated,
        }

    return app
