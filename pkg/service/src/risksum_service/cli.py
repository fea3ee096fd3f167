"""Command line entry points for the model service.

Two subcommands, deliberately kept in separate processes: ``finetune``
trains a risk classifier from a labeled JSONL dataset and writes the
artifacts to a directory, and ``serve`` loads finished checkpoints and
exposes them over HTTP. Which checkpoints are served is configuration;
point the flags at a hub identifier or at a directory produced by
``finetune``.
"""

from __future__ import annotations

import argparse
import logging
import sys

from risksum_service.config import (
    DEFAULT_GENERATOR_MODEL,
    DEFAULT_RISK_MODEL,
    DEFAULT_SENTIMENT_MODEL,
    GenerationConfig,
    ServiceConfig,
    TrainingConfig,
)

logger = logging.getLogger(__name__)


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from risksum_service.app import create_app

    config = ServiceConfig(
        risk_model=args.risk_model,
        sentiment_model=args.sentiment_model,
        generator_model=args.generator_model,
        device=args.device,
        test_mode=args.test_mode,
        max_batch_size=args.max_batch_size,
        generation_timeout=args.generation_timeout,
        generation=GenerationConfig(
            max_length=args.max_length,
            max_new_tokens=args.max_new_tokens,
        ),
    )
    logger.info("serving with config hash %s", config.config_hash)
    uvicorn.run(create_app(config), host=args.host, port=args.port)
    return 0


def _cmd_finetune(args: argparse.Namespace) -> int:
    from risksum_service.dataset import read_dataset_jsonl
    from risksum_service.training import finetune_risk_classifier

    dataset = read_dataset_jsonl(args.dataset)
    logger.info(
        "loaded %d train / %d val examples", len(dataset.train), len(dataset.val)
    )
    config = TrainingConfig(
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        warmup_ratio=args.warmup_ratio,
        max_epochs=args.max_epochs,
        seed=args.seed,
    )
    result = finetune_risk_classifier(
        dataset, config, base_model=args.base_model, device=args.device
    )
    result.save(args.out)
    print(
        f"best epoch {result.best_epoch}: "
        f"val accuracy {result.best_val_accuracy:.4f}"
    )
    print(f"saved to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risksum-service",
        description="Model service: fine-tune a risk classifier, serve models over HTTP.",
    )
    sub = parser.add_subparsers(dest="command")

    serve = sub.add_parser("serve", help="serve loaded models over HTTP")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument(
        "--risk-model",
        default=DEFAULT_RISK_MODEL,
        help="checkpoint for /score/risk; 'none' leaves it unloaded",
    )
    serve.add_argument(
        "--sentiment-model",
        default=DEFAULT_SENTIMENT_MODEL,
        help="checkpoint for /score/sentiment; 'none' leaves it unloaded",
    )
    serve.add_argument(
        "--generator-model",
        default=DEFAULT_GENERATOR_MODEL,
        help="checkpoint for /generate/*; 'none' leaves it unloaded",
    )
    serve.add_argument("--device", default="cpu")
    serve.add_argument(
        "--test-mode",
        action="store_true",
        help="disable sampling so generation is deterministic",
    )
    serve.add_argument("--max-batch-size", type=int, default=32)
    serve.add_argument("--generation-timeout", type=float, default=120.0)
    serve.add_argument("--max-length", type=int, default=1024)
    serve.add_argument("--max-new-tokens", type=int, default=128)
    serve.set_defaults(handler=_cmd_serve)

    finetune = sub.add_parser(
        "finetune", help="fine-tune a risk classifier on a labeled dataset"
    )
    finetune.add_argument("--dataset", required=True, help="labeled JSONL dataset")
    finetune.add_argument("--out", required=True, help="output directory")
    finetune.add_argument("--base-model", default=DEFAULT_RISK_MODEL)
    finetune.add_argument("--batch-size", type=int, default=8)
    finetune.add_argument("--learning-rate", type=float, default=2e-5)
    finetune.add_argument("--warmup-ratio", type=float, default=0.1)
    finetune.add_argument("--max-epochs", type=int, default=50)
    finetune.add_argument("--seed", type=int, default=0)
    finetune.add_argument("--device", default="cpu")
    finetune.set_defaults(handler=_cmd_finetune)
    return parser


def run_command(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_usage(sys.stderr)
        return 1
    for name in ("risk_model", "sentiment_model", "generator_model"):
        if getattr(args, name, None) == "none":
            setattr(args, name, None)
    try:
        return args.handler(args)
    except ValueError as error:
        print(f"error: {error}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    sys.exit(run_command())


if __name__ == "__main__":
    main()
