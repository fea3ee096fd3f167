"""Command-line pipeline wiring.

Every subcommand resolves a single PipelineConfig from defaults, an
optional TOML file, the RISKSUM_ENDPOINT environment variable, and
command-line flags (highest precedence last). Every artifact embeds the
producing command, the hash of the resolved config, and the seed, so a
run can be audited and reproduced; no timestamps are written, keeping
equal-seed runs byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from risksum.corpus import (
    COMMA_DELIMITERS,
    DEFAULT_DELIMITERS,
    CorpusError,
    RiskLevel,
    UserTimeline,
    concatenated_posts,
    load_corpus,
    timeline_sentences,
)
from risksum.evaluation import (
    SpanMeasure,
    evaluate_highlights,
    precision_correlation_analysis,
    risk_ratio_analysis,
    span_precision,
)
from risksum.highlight import HighlightConfig, extract_highlights
from risksum.lexicon import (
    RiskPhraseLexicon,
    SummaryPhraseTable,
    build_weak_labeled_dataset,
    default_risk_lexicon,
    default_summary_table,
    read_dataset_jsonl,
    write_dataset_jsonl,
)
from risksum.scoring import (
    BaselineRiskModel,
    LexiconBaselineRiskScorer,
    RemoteModelClient,
    RemoteServiceError,
    ValenceSentimentBaseline,
    score_sentences,
    train_baseline,
)
from risksum.summary import assemble_summary, build_summary_parts

logger = logging.getLogger(__name__)

ENDPOINT_ENV_VAR = "RISKSUM_ENDPOINT"

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_REMOTE_ERROR = 2


class UsageError(Exception):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    corpus: str | None = None
    output_dir: str = "out"
    seed: int = 0
    risk_threshold: float = 0.5
    word_budget: int = 300
    min_candidate_words: int = 3
    scorer: str = "lexicon-baseline"
    split_on_comma: bool = False
    jobs: int = 1
    risk_phrases: str | None = None
    summary_phrases: str | None = None
    val_fraction: float = 0.2
    balance_tolerance: int = 0
    baseline_model: str | None = None
    endpoint: str | None = None
    timeout: float = 10.0
    batch_size: int = 32

    def validate(self) -> None:
        if self.scorer not in ("lexicon-baseline", "remote"):
            raise ConfigError(
                f"scorer must be 'lexicon-baseline' or 'remote', got {self.scorer!r}"
            )
        if not 0.0 <= self.risk_threshold <= 1.0:
            raise ConfigError("risk_threshold must be in [0, 1]")
        if self.word_budget <= 0:
            raise ConfigError("word_budget must be positive")
        if self.min_candidate_words < 1:
            raise ConfigError("min_candidate_words must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in (0, 1)")
        if self.balance_tolerance < 0:
            raise ConfigError("balance_tolerance must be >= 0")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")

    @property
    def config_hash(self) -> str:
        """Hash of the output-affecting configuration.

        output_dir and jobs are excluded: they steer where and how the
        pipeline runs, never what it writes, so runs that differ only in
        those knobs stay byte-comparable.
        """
        values = asdict(self)
        del values["output_dir"]
        del values["jobs"]
        canonical = json.dumps(values, sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    @property
    def delimiters(self) -> str:
        return COMMA_DELIMITERS if self.split_on_comma else DEFAULT_DELIMITERS


_TOML_SECTIONS = {
    "lexicon": {"risk_phrases": str, "summary_phrases": str},
    "dataset": {"val_fraction": float, "balance_tolerance": int},
    "baseline": {"model": str},
    "remote": {"endpoint": str, "timeout": float, "batch_size": int},
}
_TOML_TOP_LEVEL = {
    "corpus": str,
    "output_dir": str,
    "seed": int,
    "risk_threshold": float,
    "word_budget": int,
    "min_candidate_words": int,
    "scorer": str,
    "split_on_comma": bool,
    "jobs": int,
}
_SECTION_FIELD_NAMES = {
    ("baseline", "model"): "baseline_model",
}


def _coerce(value, expected, where):
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, expected) or (
        expected is int and isinstance(value, bool)
    ):
        raise ConfigError(f"{where}: expected {expected.__name__}, got {value!r}")
    return value


def _read_config_file(path: Path) -> dict:
    try:
        with path.open("rb") as handle:
            raw = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    values: dict = {}
    for key, value in raw.items():
        if key in _TOML_TOP_LEVEL:
            values[key] = _coerce(value, _TOML_TOP_LEVEL[key], f"{path}: {key}")
        elif key in _TOML_SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: [{key}] must be a table")
            for sub_key, sub_value in value.items():
                if sub_key not in _TOML_SECTIONS[key]:
                    raise ConfigError(f"{path}: unknown key {key}.{sub_key}")
                field_name = _SECTION_FIELD_NAMES.get((key, sub_key), sub_key)
                values[field_name] = _coerce(
                    sub_value, _TOML_SECTIONS[key][sub_key], f"{path}: {key}.{sub_key}"
                )
        else:
            raise ConfigError(f"{path}: unknown key {key!r}")
    return values


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults < config file < environment < flags."""
    config = PipelineConfig()
    config_path = getattr(args, "config", None)
    if config_path:
        config = replace(config, **_read_config_file(Path(config_path)))
    env_endpoint = os.environ.get(ENDPOINT_ENV_VAR)
    if env_endpoint:
        config = replace(config, endpoint=env_endpoint)
    overrides = {}
    for name in (
        "corpus",
        "output_dir",
        "seed",
        "risk_threshold",
        "word_budget",
        "min_candidate_words",
        "scorer",
        "jobs",
        "val_fraction",
        "balance_tolerance",
        "baseline_model",
        "endpoint",
    ):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "split_on_comma", False):
        overrides["split_on_comma"] = True
    config = replace(config, **overrides)
    config.validate()
    return config


def _meta(config: PipelineConfig, command: str) -> dict:
    return {"command": command, "config_hash": config.config_hash, "seed": config.seed}


def _write_jsonl(path: Path, meta: dict, records) -> None:
    with path.open("w", encoding="utf-8") as handle:
        handle.write(json.dumps({"meta": meta}, ensure_ascii=False) + "\n")
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def _read_spans_jsonl(path: Path) -> dict[str, list[str]]:
    """Highlight-format JSONL back to per-user span text lists."""
    spans: dict[str, list[str]] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            if "meta" in obj and lineno == 1:
                continue
            for key in ("user_id", "text"):
                if not isinstance(obj.get(key), str):
                    raise CorpusError(f"{path}:{lineno}: missing string key {key!r}")
            spans.setdefault(obj["user_id"], []).append(obj["text"])
    return spans


def _csv_writer(handle, config: PipelineConfig, command: str):
    handle.write(
        f"# command={command} config_hash={config.config_hash} seed={config.seed}\n"
    )
    return csv.writer(handle, lineterminator="\n")


def _require_corpus(config: PipelineConfig) -> list[UserTimeline]:
    if not config.corpus:
        raise ConfigError("corpus path is required (--corpus flag or config file)")
    return load_corpus(config.corpus)


def _load_lexicon(config: PipelineConfig) -> RiskPhraseLexicon:
    if config.risk_phrases:
        return RiskPhraseLexicon.from_file(config.risk_phrases)
    return default_risk_lexicon()


def _load_summary_table(
    config: PipelineConfig, lexicon: RiskPhraseLexicon
) -> SummaryPhraseTable:
    if config.summary_phrases:
        return SummaryPhraseTable.from_file(config.summary_phrases, lexicon)
    return default_summary_table()


def _build_scorers(config: PipelineConfig, lexicon: RiskPhraseLexicon):
    """Returns (risk_scorer, sentiment_scorer, term_provider, summary_provider)."""
    if config.scorer == "remote":
        if not config.endpoint:
            raise ConfigError(
                "remote scorer needs an endpoint (config [remote], "
                f"{ENDPOINT_ENV_VAR}, or --endpoint)"
            )
        client = RemoteModelClient(
            endpoint=config.endpoint,
            timeout=config.timeout,
            batch_size=config.batch_size,
        )
        return client, client, client.generate_terms, client.generate_summary
    model = None
    if config.baseline_model:
        model = BaselineRiskModel.load(config.baseline_model)
    risk_scorer = LexiconBaselineRiskScorer(lexicon=lexicon, model=model)
    return risk_scorer, ValenceSentimentBaseline.default(), None, None


def _per_user(config: PipelineConfig, timelines, work: Callable):
    """Apply ``work`` per timeline, user-id order, optionally in parallel."""
    ordered = sorted(timelines, key=lambda t: t.user_id)
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(work, ordered))
    return [work(timeline) for timeline in ordered]


def _cmd_segment(config: PipelineConfig, args: argparse.Namespace) -> int:
    timelines = _require_corpus(config)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "sentences.jsonl"

    def records():
        for timeline in timelines:
            for sentence in timeline_sentences(timeline, config.delimiters):
                yield {
                    "user_id": timeline.user_id,
                    "post_id": sentence.post_id,
                    "index": sentence.index,
                    "text": sentence.text,
                    "char_start": sentence.char_start,
                    "char_end": sentence.char_end,
                }

    _write_jsonl(path, _meta(config, "segment"), records())
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_build_dataset(config: PipelineConfig, args: argparse.Namespace) -> int:
    timelines = _require_corpus(config)
    lexicon = _load_lexicon(config)
    dataset = build_weak_labeled_dataset(
        timelines,
        lexicon,
        seed=config.seed,
        val_fraction=config.val_fraction,
        balance_tolerance=config.balance_tolerance,
    )
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "dataset.jsonl"
    write_dataset_jsonl(dataset, path, meta=_meta(config, "build-dataset"))
    counts = dataset.counts
    print(
        f"wrote {path} (train 1/0: {counts['train'][1]}/{counts['train'][0]}, "
        f"val 1/0: {counts['val'][1]}/{counts['val'][0]})"
    )
    return EXIT_OK


def _cmd_train_baseline(config: PipelineConfig, args: argparse.Namespace) -> int:
    dataset_path = Path(args.dataset) if args.dataset else Path(config.output_dir) / "dataset.jsonl"
    dataset = read_dataset_jsonl(dataset_path)
    model = train_baseline(
        dataset,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        seed=config.seed,
    )
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model_path = out_dir / "baseline_model.txt"
    model.save(model_path)
    metrics_path = out_dir / "training_metrics.jsonl"
    _write_jsonl(
        metrics_path,
        _meta(config, "train-baseline"),
        (
            {
                "epoch": m.epoch,
                "train_accuracy": m.train_accuracy,
                "val_accuracy": m.val_accuracy,
            }
            for m in model.history
        ),
    )
    best = max(m.val_accuracy for m in model.history)
    print(f"wrote {model_path} and {metrics_path} (best val accuracy {best:.4f})")
    return EXIT_OK


def _cmd_score(config: PipelineConfig, args: argparse.Namespace) -> int:
    timelines = _require_corpus(config)
    lexicon = _load_lexicon(config)
    risk_scorer, sentiment_scorer, _, _ = _build_scorers(config, lexicon)

    def work(timeline: UserTimeline) -> list[dict]:
        sentences = timeline_sentences(timeline, config.delimiters)
        scored = score_sentences(
            risk_scorer, sentiment_scorer, sentences, config.risk_threshold
        )
        return [
            {
                "user_id": timeline.user_id,
                "post_id": item.sentence.post_id,
                "index": item.sentence.index,
                "text": item.sentence.text,
                "p_risk": item.risk.p_risk,
                "p_negative": item.sentiment.p_negative,
                "p_neutral": item.sentiment.p_neutral,
                "p_positive": item.sentiment.p_positive,
                "risk_positive": item.risk_positive,
            }
            for item in scored
        ]

    batches = _per_user(config, timelines, work)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "scores.jsonl"
    _write_jsonl(path, _meta(config, "score"), (r for batch in batches for r in batch))
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_highlight(config: PipelineConfig, args: argparse.Namespace) -> int:
    timelines = _require_corpus(config)
    lexicon = _load_lexicon(config)
    risk_scorer, sentiment_scorer, term_provider, _ = _build_scorers(config, lexicon)
    highlight_config = HighlightConfig(
        risk_threshold=config.risk_threshold,
        word_budget=config.word_budget,
        min_candidate_words=config.min_candidate_words,
    )

    def work(timeline: UserTimeline) -> list[dict]:
        sentences = timeline_sentences(timeline, config.delimiters)
        scored = score_sentences(
            risk_scorer, sentiment_scorer, sentences, config.risk_threshold
        )
        highlight_set = extract_highlights(
            scored,
            term_provider,
            highlight_config,
            user_id=timeline.user_id,
            posts_text=concatenated_posts(timeline),
        )
        return [
            {
                "user_id": timeline.user_id,
                "post_id": entry.sentence.post_id,
                "char_start": entry.sentence.char_start,
                "char_end": entry.sentence.char_end,
                "text": entry.sentence.text,
                "provenance": entry.provenance,
                "total_words": highlight_set.total_words,
            }
            for entry in highlight_set.entries
        ]

    batches = _per_user(config, timelines, work)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "highlights.jsonl"
    _write_jsonl(
        path, _meta(config, "highlight"), (r for batch in batches for r in batch)
    )
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_summarize(config: PipelineConfig, args: argparse.Namespace) -> int:
    timelines = _require_corpus(config)
    lexicon = _load_lexicon(config)
    table = _load_summary_table(config, lexicon)
    risk_scorer, sentiment_scorer, _, summary_provider = _build_scorers(config, lexicon)

    def work(timeline: UserTimeline) -> dict | None:
        if timeline.expert_level is RiskLevel.UNKNOWN:
            logger.warning(
                "skipping user %r: no expert level for the opening summary",
                timeline.user_id,
            )
            return None
        sentences = timeline_sentences(timeline, config.delimiters)
        scored = score_sentences(
            risk_scorer, sentiment_scorer, sentences, config.risk_threshold
        )
        n_risk = sum(1 for item in scored if item.risk_positive)
        generative = (
            summary_provider(concatenated_posts(timeline)) if summary_provider else None
        )
        parts = build_summary_parts(
            timeline.expert_level, n_risk, sentences, table, generative
        )
        return {
            "user_id": timeline.user_id,
            "summary": assemble_summary(parts),
            "opening": parts.opening,
            "frequency": parts.frequency,
            "dictionary": parts.dictionary,
            "generative": parts.generative,
        }

    records = [r for r in _per_user(config, timelines, work) if r is not None]
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "summaries.jsonl"
    _write_jsonl(path, _meta(config, "summarize"), records)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_evaluate(config: PipelineConfig, args: argparse.Namespace) -> int:
    predicted = _read_spans_jsonl(Path(args.pred))
    gold = _read_spans_jsonl(Path(args.gold))
    report = evaluate_highlights(predicted, gold)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "evaluation.json"
    payload = {
        "meta": _meta(config, "evaluate"),
        "recall": report.recall,
        "precision": report.precision,
        "recall_user_mean": report.recall_user_mean,
        "precision_user_mean": report.precision_user_mean,
        "n_gold_spans": report.n_gold_spans,
        "n_predicted_spans": report.n_predicted_spans,
        "users_without_predictions": list(report.users_without_predictions),
        "users_without_gold": list(report.users_without_gold),
        "consistency": "not implemented",
    }
    path.write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    print(f"recall (span mean): {report.recall:.4f}")
    print(f"precision (span mean): {report.precision:.4f}")
    print(f"recall (user mean): {report.recall_user_mean:.4f}")
    print(f"precision (user mean): {report.precision_user_mean:.4f}")
    print("consistency: not implemented")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_analyze(config: PipelineConfig, args: argparse.Namespace) -> int:
    from risksum.plots import (
        render_level_ratio_figure,
        render_precision_correlation_figure,
    )

    if bool(args.pred) != bool(args.gold):
        raise ConfigError("--pred and --gold must be given together")
    timelines = _require_corpus(config)
    lexicon = _load_lexicon(config)
    risk_scorer, sentiment_scorer, _, _ = _build_scorers(config, lexicon)
    risk_stats, negative_stats = risk_ratio_analysis(
        timelines, risk_scorer, sentiment_scorer, config.risk_threshold
    )
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    csv_path = out_dir / "ratio_quartiles.csv"
    with csv_path.open("w", encoding="utf-8", newline="") as handle:
        writer = _csv_writer(handle, config, "analyze")
        writer.writerow(
            ["metric", "level", "n_users", "min", "q1", "median", "q3", "max"]
        )
        for stats in (risk_stats, negative_stats):
            for row in stats.rows:
                writer.writerow(
                    [
                        stats.metric,
                        row.level.value,
                        row.n_users,
                        *(str(v) for v in row.quartiles.as_tuple()),
                    ]
                )
    figure_path = out_dir / "level_ratios.png"
    render_level_ratio_figure(risk_stats, negative_stats, figure_path)
    written = [csv_path, figure_path]

    if args.pred:
        predicted = _read_spans_jsonl(Path(args.pred))
        gold = _read_spans_jsonl(Path(args.gold))
        measures = []
        for user_id in sorted(predicted):
            texts = predicted[user_id]
            if not texts:
                continue
            probs = risk_scorer.risk_probabilities(texts)
            dists = sentiment_scorer.sentiment_distributions(texts)
            gold_texts = gold.get(user_id, [])
            for text, p_risk, dist in zip(texts, probs, dists):
                measures.append(
                    SpanMeasure(
                        p_risk=p_risk,
                        p_negative=dist[0],
                        precision=span_precision(text, gold_texts),
                    )
                )
        rows = precision_correlation_analysis(measures, n_bins=args.bins)
        corr_path = out_dir / "precision_correlation.csv"
        with corr_path.open("w", encoding="utf-8", newline="") as handle:
            writer = _csv_writer(handle, config, "analyze")
            writer.writerow(
                [
                    "precision_low",
                    "precision_high",
                    "n",
                    "mean_risk_prob",
                    "mean_negative_prob",
                    "frac_risk_above_0_9",
                    "frac_negative_above_0_9",
                ]
            )
            for row in rows:
                writer.writerow(
                    [
                        str(row.precision_low),
                        str(row.precision_high),
                        row.n,
                        "" if row.mean_risk_prob is None else str(row.mean_risk_prob),
                        ""
                        if row.mean_negative_prob is None
                        else str(row.mean_negative_prob),
                        ""
                        if row.frac_risk_above_0_9 is None
                        else str(row.frac_risk_above_0_9),
                        ""
                        if row.frac_negative_above_0_9 is None
                        else str(row.frac_negative_above_0_9),
                    ]
                )
        corr_figure = out_dir / "precision_correlation.png"
        render_precision_correlation_figure(rows, corr_figure)
        written.extend([corr_path, corr_figure])

    print("wrote " + ", ".join(str(p) for p in written))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--corpus", help="corpus JSONL path")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--jobs", type=int)


def _add_scorer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scorer", choices=["lexicon-baseline", "remote"])
    parser.add_argument("--endpoint")
    parser.add_argument("--risk-threshold", dest="risk_threshold", type=float)
    parser.add_argument("--baseline-model", dest="baseline_model")


def build_parser() -> _Parser:
    parser = _Parser(prog="risksum", description=__doc__)
    commands = parser.add_subparsers(dest="command", metavar="command")

    sub = commands.add_parser("segment", help="split posts into sentence records")
    _add_common(sub)
    sub.add_argument("--split-on-comma", action="store_true", default=False)
    sub.set_defaults(handler=_cmd_segment)

    sub = commands.add_parser("build-dataset", help="weak-label sentences and split")
    _add_common(sub)
    sub.add_argument("--val-fraction", dest="val_fraction", type=float)
    sub.add_argument("--balance-tolerance", dest="balance_tolerance", type=int)
    sub.set_defaults(handler=_cmd_build_dataset)

    sub = commands.add_parser("train-baseline", help="train the n-gram risk model")
    _add_common(sub)
    sub.add_argument("--dataset", help="dataset JSONL (default: <output-dir>/dataset.jsonl)")
    sub.add_argument("--epochs", type=int, default=20)
    sub.add_argument("--learning-rate", dest="learning_rate", type=float, default=0.1)
    sub.set_defaults(handler=_cmd_train_baseline)

    sub = commands.add_parser("score", help="score every sentence")
    _add_common(sub)
    _add_scorer_flags(sub)
    sub.set_defaults(handler=_cmd_score)

    sub = commands.add_parser("highlight", help="select budgeted highlights per user")
    _add_common(sub)
    _add_scorer_flags(sub)
    sub.add_argument("--word-budget", dest="word_budget", type=int)
    sub.add_argument(
        "--min-candidate-words", dest="min_candidate_words", type=int
    )
    sub.set_defaults(handler=_cmd_highlight)

    sub = commands.add_parser("summarize", help="write template summaries per user")
    _add_common(sub)
    _add_scorer_flags(sub)
    sub.set_defaults(handler=_cmd_summarize)

    sub = commands.add_parser("evaluate", help="score predictions against gold spans")
    _add_common(sub)
    sub.add_argument("--pred", required=True, help="predicted highlights JSONL")
    sub.add_argument("--gold", required=True, help="gold highlights JSONL")
    sub.set_defaults(handler=_cmd_evaluate)

    sub = commands.add_parser("analyze", help="ratio quartiles, figures, correlations")
    _add_common(sub)
    _add_scorer_flags(sub)
    sub.add_argument("--pred", help="predicted highlights JSONL")
    sub.add_argument("--gold", help="gold highlights JSONL")
    sub.add_argument("--bins", type=int, default=5)
    sub.set_defaults(handler=_cmd_analyze)

    return parser


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_INPUT_ERROR
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        config = resolve_config(args)
        return args.handler(config, args)
    except RemoteServiceError as exc:
        print(f"remote service error: {exc}", file=sys.stderr)
        return EXIT_REMOTE_ERROR
    except (ValueError, OSError) as exc:
        # CorpusError, LexiconError, ScoringError, and ConfigError all
        # subclass ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def main() -> None:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    sys.exit(run_command())


if __name__ == "__main__":
    main()
