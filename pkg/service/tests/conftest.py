"""Shared fixtures: tiny randomly initialised checkpoints on disk.

The service treats model identifiers as configuration, so the tests
point it at small locally built checkpoints instead of pulling anything
over the network. The tokenizer is assembled from an explicit WordPiece
table, which keeps every test word in-vocabulary and makes token counts
predictable.
"""

from __future__ import annotations

import random
from pathlib import Path

import pytest
import torch
from fastapi.testclient import TestClient
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
from transformers import PreTrainedTokenizerFast

from risksum_service.app import create_app
from risksum_service.config import GenerationConfig, ServiceConfig
from risksum_service.dataset import LabeledDataset, LabeledExample
from risksum_service.models import ModelBundle

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

WORDS = [
    # risk-side template words
    "i", "am", "thinking", "about", "suicide", "again", "feels", "like",
    "my", "only", "option", "left", "keep", "planning", "at", "night",
    "the", "thoughts", "will", "not", "stop", "now", "want", "to",
    "attempt", "soon", "seems", "better", "than", "this", "pain",
    "wrote", "note", "yesterday", "die", "end", "life", "hopeless",
    "kill", "myself", "plan", "is", "ready",
    # everyday template words
    "garden", "needs", "water", "every", "morning", "we", "watched",
    "a", "movie", "after", "dinner", "team", "shipped", "new",
    "feature", "coffee", "shop", "opens", "seven", "she", "painted",
    "fence", "bright", "blue", "train", "was", "late", "today", "he",
    "baked", "bread", "for", "market", "kids", "played", "soccer",
    "in", "park",
    # connective filler
    "honestly", "lately", "sometimes", "usually", "often", "sure",
    "think", "these", "days", "right", "be", "honest", "more", "and",
    ".", ",", "!",
]

POSITIVE_TEMPLATES = [
    "i am thinking about suicide again",
    "suicide feels like my only option left",
    "i keep planning my suicide at night",
    "the suicide thoughts will not stop now",
    "i want to attempt suicide soon",
    "suicide seems better than this pain",
    "i wrote my suicide note yesterday",
]

NEGATIVE_TEMPLATES = [
    "the garden needs water every morning",
    "we watched a movie after dinner",
    "my team shipped the new feature",
    "the coffee shop opens at seven",
    "she painted the fence bright blue",
    "the train was late again today",
    "he baked bread for the market",
    "the kids played soccer in the park",
]

PREFIXES = ["today", "honestly", "lately", "sometimes", "usually", "often"]
SUFFIXES = [
    "for sure", "i think", "these days", "right now", "to be honest",
    "more and more",
]


def build_tokenizer(wrap: bool, model_max_length: int) -> PreTrainedTokenizerFast:
    """WordPiece tokenizer over the fixed test vocabulary.

    ``wrap=True`` adds [CLS]/[SEP] framing for encoder models; the
    causal generator takes the bare sequence.
    """
    vocab = {token: idx for idx, token in enumerate(SPECIAL_TOKENS + WORDS)}
    wordpiece = Tokenizer(models.WordPiece(vocab, unk_token="[UNK]"))
    wordpiece.normalizer = normalizers.BertNormalizer(lowercase=True)
    wordpiece.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    if wrap:
        wordpiece.post_processor = processors.BertProcessing(
            sep=("[SEP]", vocab["[SEP]"]), cls=("[CLS]", vocab["[CLS]"])
        )
    return PreTrainedTokenizerFast(
        tokenizer_object=wordpiece,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=model_max_length,
    )


def _save_classifier(path: Path, num_labels: int, id2label: dict | None) -> None:
    from transformers import BertConfig, BertForSequenceClassification

    tokenizer = build_tokenizer(wrap=True, model_max_length=64)
    config = BertConfig(
        vocab_size=len(SPECIAL_TOKENS) + len(WORDS),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=128,
        max_position_embeddings=64,
        num_labels=num_labels,
        pad_token_id=0,
    )
    if id2label is not None:
        config.id2label = id2label
        config.label2id = {name: idx for idx, name in id2label.items()}
    torch.manual_seed(0)
    model = BertForSequenceClassification(config)
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)


def _save_encoder_base(path: Path) -> None:
    from transformers import BertConfig, BertModel

    tokenizer = build_tokenizer(wrap=True, model_max_length=64)
    config = BertConfig(
        vocab_size=len(SPECIAL_TOKENS) + len(WORDS),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=128,
        max_position_embeddings=64,
        pad_token_id=0,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)


def _save_generator(path: Path) -> None:
    """Tiny causal LM whose greedy decode yields visible text.

    A random init can happen to argmax onto a special token forever,
    which would decode to an empty string; search a few seeds for one
    that produces real words under greedy decoding.
    """
    from transformers import LlamaConfig, LlamaForCausalLM

    tokenizer = build_tokenizer(wrap=False, model_max_length=512)
    sample = tokenizer("water the garden every morning", return_tensors="pt")
    for seed in range(64):
        torch.manual_seed(seed)
        config = LlamaConfig(
            vocab_size=len(SPECIAL_TOKENS) + len(WORDS),
            hidden_size=32,
            intermediate_size=64,
            num_hidden_layers=2,
            num_attention_heads=4,
            num_key_value_heads=4,
            max_position_embeddings=512,
            pad_token_id=0,
            bos_token_id=None,
            eos_token_id=None,
            tie_word_embeddings=False,
        )
        model = LlamaForCausalLM(config)
        model.eval()
        with torch.no_grad():
            output = model.generate(
                **sample, max_new_tokens=8, do_sample=False, pad_token_id=0
            )
        decoded = tokenizer.decode(
            output[0][sample["input_ids"].shape[1] :], skip_special_tokens=True
        )
        if decoded.strip():
            model.save_pretrained(path)
            tokenizer.save_pretrained(path)
            return
    raise RuntimeError("no generator seed produced visible greedy output")


@pytest.fixture(scope="session")
def tiny_checkpoints(tmp_path_factory) -> dict[str, Path]:
    root = tmp_path_factory.mktemp("checkpoints")
    _save_classifier(root / "risk", num_labels=2, id2label=None)
    # deliberately scrambled label order; serving must map it by name
    _save_classifier(
        root / "sentiment",
        num_labels=3,
        id2label={0: "positive", 1: "negative", 2: "neutral"},
    )
    _save_generator(root / "generator")
    _save_encoder_base(root / "encoder_base")
    return {
        "risk": root / "risk",
        "sentiment": root / "sentiment",
        "generator": root / "generator",
        "encoder_base": root / "encoder_base",
    }


@pytest.fixture(scope="session")
def dataset_factory():
    """Builder for balanced separable datasets of any size."""

    def make(n_train: int, n_val: int, seed: int) -> LabeledDataset:
        rng = random.Random(seed)

        def sentence(label: int) -> LabeledExample:
            pool = POSITIVE_TEMPLATES if label else NEGATIVE_TEMPLATES
            text = " ".join(
                [rng.choice(PREFIXES), rng.choice(pool), rng.choice(SUFFIXES)]
            )
            return LabeledExample(text=text, label=label)

        def split(n: int) -> tuple[LabeledExample, ...]:
            rows = [sentence(1) for _ in range(n // 2)]
            rows += [sentence(0) for _ in range(n - n // 2)]
            rng.shuffle(rows)
            return tuple(rows)

        return LabeledDataset(train=split(n_train), val=split(n_val))

    return make


@pytest.fixture(scope="session")
def serve_config(tiny_checkpoints) -> ServiceConfig:
    return ServiceConfig(
        risk_model=str(tiny_checkpoints["risk"]),
        sentiment_model=str(tiny_checkpoints["sentiment"]),
        generator_model=str(tiny_checkpoints["generator"]),
        test_mode=True,
        max_batch_size=4,
        generation_timeout=30.0,
        generation=GenerationConfig(max_length=64, max_new_tokens=8),
    )


@pytest.fixture(scope="session")
def bundle(serve_config) -> ModelBundle:
    loaded = ModelBundle(serve_config)
    loaded.load()
    return loaded


@pytest.fixture(scope="session")
def client(serve_config, bundle) -> TestClient:
    return TestClient(create_app(serve_config, bundle))
