"""Labeled-dataset JSONL reading.

The wire format matches the pipeline's dataset artifact: an optional
``{"meta": ...}`` first line, then one object per line with ``text``
(string), ``label`` (0 or 1), and ``split`` ("train" or "val").
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledExample:
    text: str
    label: int


@dataclass(frozen=True)
class LabeledDataset:
    train: tuple[LabeledExample, ...]
    val: tuple[LabeledExample, ...]

    @property
    def counts(self) -> dict[str, dict[int, int]]:
        out: dict[str, dict[int, int]] = {}
        for name, rows in (("train", self.train), ("val", self.val)):
            out[name] = {
                0: sum(1 for r in rows if r.label == 0),
                1: sum(1 for r in rows if r.label == 1),
            }
        return out


def read_dataset_jsonl(path: str | Path) -> LabeledDataset:
    path = Path(path)
    train: list[LabeledExample] = []
    val: list[LabeledExample] = []
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(
                    f"{path}:{lineno}: invalid JSON ({exc.msg})"
                ) from exc
            if not isinstance(obj, dict):
                raise DatasetError(f"{path}:{lineno}: expected a JSON object")
            if lineno == 1 and "meta" in obj:
                continue
            text = obj.get("text")
            if not isinstance(text, str):
                raise DatasetError(f"{path}:{lineno}: 'text' must be a string")
            label = obj.get("label")
            if label not in (0, 1):
                raise DatasetError(f"{path}:{lineno}: 'label' must be 0 or 1")
            split = obj.get("split")
            if split == "train":
                train.append(LabeledExample(text, label))
            elif split == "val":
                val.append(LabeledExample(text, label))
            else:
                raise DatasetError(
                    f"{path}:{lineno}: 'split' must be 'train' or 'val'"
                )
    return LabeledDataset(train=tuple(train), val=tuple(val))
