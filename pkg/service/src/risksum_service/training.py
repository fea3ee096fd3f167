"""Risk-classifier fine-tuning.

A sequence classification head (softmax over two classes) on the
start-token pooled representation of a pre-trained bidirectional
encoder, trained with AdamW under a linear warmup/decay schedule. The
checkpoint with the best validation accuracy is kept (earliest epoch on
ties), and per-epoch metrics are returned for learning-curve plots.
Training never runs inside the serving process; the serve entry point
only loads finished artifacts.
"""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.optim import AdamW
from torch.optim.lr_scheduler import LambdaLR
from torch.utils.data import DataLoader

from risksum_service.config import TrainingConfig
from risksum_service.dataset import LabeledDataset, LabeledExample

logger = logging.getLogger(__name__)

# guard against tokenizers that report a sentinel "no limit" value
_MAX_REASONABLE_LENGTH = 1_000_000


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    val_accuracy: float


@dataclass
class FinetuneResult:
    model: "torch.nn.Module"
    tokenizer: object
    history: tuple[EpochMetrics, ...]
    best_epoch: int
    best_val_accuracy: float

    def save(self, out_dir: str | Path) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self.model.save_pretrained(out_dir)
        self.tokenizer.save_pretrained(out_dir)
        metrics_path = out_dir / "training_metrics.jsonl"
        with metrics_path.open("w", encoding="utf-8") as handle:
            header = {
                "best_epoch": self.best_epoch,
                "best_val_accuracy": self.best_val_accuracy,
            }
            handle.write(json.dumps({"meta": header}) + "\n")
            for metrics in self.history:
                handle.write(
                    json.dumps(
                        {
                            "epoch": metrics.epoch,
                            "train_loss": metrics.train_loss,
                            "val_accuracy": metrics.val_accuracy,
                        }
                    )
                    + "\n"
                )


def _sequence_length(tokenizer, model, config: TrainingConfig) -> int:
    if config.max_sequence_length is not None:
        return config.max_sequence_length
    length = getattr(tokenizer, "model_max_length", _MAX_REASONABLE_LENGTH)
    if length > _MAX_REASONABLE_LENGTH:
        length = getattr(model.config, "max_position_embeddings", 512)
    return int(length)


def _accuracy(model, tokenizer, rows, max_length: int, device) -> float:
    model.eval()
    correct = 0
    with torch.no_grad():
        for start in range(0, len(rows), 32):
            chunk = rows[start : start + 32]
            encoded = tokenizer(
                [row.text for row in chunk],
                padding=True,
                truncation=True,
                max_length=max_length,
                return_tensors="pt",
            ).to(device)
            predicted = model(**encoded).logits.argmax(dim=-1)
            correct += sum(
                int(p.item() == row.label) for p, row in zip(predicted, chunk)
            )
    return correct / len(rows)


def finetune_risk_classifier(
    dataset: LabeledDataset,
    config: TrainingConfig | None = None,
    base_model: str = "bert-base-uncased",
    device: str = "cpu",
) -> FinetuneResult:
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    config = config or TrainingConfig()
    if len(dataset.train) < config.batch_size:
        raise TrainingError(
            f"dataset too small for one batch: {len(dataset.train)} training "
            f"examples < batch_size {config.batch_size}"
        )
    if not dataset.val:
        raise TrainingError("validation split is empty")
    train_labels = {row.label for row in dataset.train}
    if train_labels != {0, 1}:
        raise TrainingError("training split must contain both classes")

    torch.manual_seed(config.seed)
    tokenizer = AutoTokenizer.from_pretrained(base_model)
    model = AutoModelForSequenceClassification.from_pretrained(
        base_model, num_labels=2
    )
    torch_device = torch.device(device)
    model.to(torch_device)
    max_length = _sequence_length(tokenizer, model, config)

    def collate(rows: list[LabeledExample]) -> dict:
        encoded = tokenizer(
            [row.text for row in rows],
            padding=True,
            truncation=True,
            max_length=max_length,
            return_tensors="pt",
        )
        encoded["labels"] = torch.tensor([row.label for row in rows])
        return encoded

    generator = torch.Generator().manual_seed(config.seed)
    loader = DataLoader(
        list(dataset.train),
        batch_size=config.batch_size,
        shuffle=True,
        collate_fn=collate,
        generator=generator,
    )
    total_steps = len(loader) * config.max_epochs
    warmup_steps = int(config.warmup_ratio * total_steps)

    def lr_factor(step: int) -> float:
        if step < warmup_steps:
            return step / max(1, warmup_steps)
        return max(
            0.0, (total_steps - step) / max(1, total_steps - warmup_steps)
        )

    optimizer = AdamW(model.parameters(), lr=config.learning_rate)
    scheduler = LambdaLR(optimizer, lr_factor)

    history: list[EpochMetrics] = []
    best_state: dict | None = None
    best_epoch = 0
    best_accuracy = -1.0
    for epoch in range(1, config.max_epochs + 1):
        model.train()
        loss_sum = 0.0
        for batch in loader:
            batch = {key: value.to(torch_device) for key, value in batch.items()}
            output = model(**batch)
            output.loss.backward()
            optimizer.step()
            scheduler.step()
            optimizer.zero_grad()
            loss_sum += output.loss.item()
        val_accuracy = _accuracy(
            model, tokenizer, list(dataset.val), max_length, torch_device
        )
        history.append(
            EpochMetrics(
                epoch=epoch,
                train_loss=loss_sum / len(loader),
                val_accuracy=val_accuracy,
            )
        )
        logger.info(
            "epoch %d: train loss %.4f, val accuracy %.4f",
            epoch,
            history[-1].train_loss,
            val_accuracy,
        )
        if val_accuracy > best_accuracy:
            best_accuracy = val_accuracy
            best_epoch = epoch
            best_state = copy.deepcopy(
                {key: value.cpu() for key, value in model.state_dict().items()}
            )

    assert best_state is not None
    model.load_state_dict(best_state)
    model.to(torch_device)
    return FinetuneResult(
        model=model,
        tokenizer=tokenizer,
        history=tuple(history),
        best_epoch=best_epoch,
        best_val_accuracy=best_accuracy,
    )
