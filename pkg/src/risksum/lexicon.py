"""Risk-phrase dictionary, summary phrase table, weak labeling.

The dictionaries ship as editable data files: lines starting with ``#``
open a group (the header is a group id or a sentence prefix), remaining
non-empty lines are phrases. Matching is case-insensitive, respects
word boundaries, and treats internal whitespace as "any whitespace run".
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from risksum.corpus import UserTimeline, timeline_sentences

GENERIC_ROW_PREFIX = "This person implies suicide such as"

_WORD_CHAR = r"[^\W_]"


class LexiconError(ValueError):
    """Raised for malformed lexicon files or unusable labeling inputs."""


def normalize_text(text: str) -> str:
    """Lowercase and map the curly apostrophe to ASCII.

    Length-preserving for the apostrophe substitution; matching relies on
    case-insensitive patterns rather than lowercasing the subject text, so
    offsets always index the original string.
    """
    return text.replace("’", "'").lower()


@lru_cache(maxsize=4096)
def _compile_phrase(phrase: str) -> re.Pattern[str]:
    # Zero-width envelope: the phrase body sits in a lookahead group so
    # finditer reports every start position, including overlapping ones.
    body = r"\s+".join(re.escape(token) for token in phrase.split())
    lead = rf"(?<!{_WORD_CHAR})" if phrase[0].isalnum() else ""
    tail = rf"(?!{_WORD_CHAR})" if phrase[-1].isalnum() else ""
    return re.compile(rf"{lead}(?=({body}){tail})", re.IGNORECASE)


def contains_phrase(text: str, phrase: str) -> bool:
    """Word-boundary, case-insensitive containment test for one phrase."""
    subject = text.replace("’", "'")
    return _compile_phrase(normalize_text(phrase)).search(subject) is not None


@dataclass(frozen=True)
class PhraseGroup:
    group_id: int
    phrases: tuple[str, ...]


@dataclass(frozen=True)
class PhraseMatch:
    """One phrase occurrence inside a sentence.

    ``phrase`` is the surface substring as written; ``canonical`` is the
    lexicon entry it matched. Offsets are half-open into the sentence.
    """

    phrase: str
    canonical: str
    group_id: int
    char_start: int
    char_end: int


@dataclass(frozen=True)
class RiskPhraseLexicon:
    groups: tuple[PhraseGroup, ...]

    @cached_property
    def _matchers(self) -> tuple[tuple[str, int, re.Pattern[str]], ...]:
        return tuple(
            (phrase, group.group_id, _compile_phrase(phrase))
            for group in self.groups
            for phrase in group.phrases
        )

    @property
    def all_phrases(self) -> tuple[str, ...]:
        return tuple(phrase for group in self.groups for phrase in group.phrases)

    @classmethod
    def from_sections(
        cls, sections: Iterable[tuple[str, Sequence[str]]], source: str = "<memory>"
    ) -> "RiskPhraseLexicon":
        groups: list[PhraseGroup] = []
        seen_ids: set[int] = set()
        seen_phrases: dict[str, int] = {}
        for header, phrases in sections:
            try:
                group_id = int(header)
            except ValueError:
                raise LexiconError(
                    f"{source}: group header {header!r} is not an integer"
                ) from None
            if group_id in seen_ids:
                raise LexiconError(f"{source}: duplicate group id {group_id}")
            seen_ids.add(group_id)
            unique: list[str] = []
            for phrase in phrases:
                if phrase in unique:
                    continue
                if phrase in seen_phrases:
                    raise LexiconError(
                        f"{source}: phrase {phrase!r} appears in groups "
                        f"{seen_phrases[phrase]} and {group_id}"
                    )
                seen_phrases[phrase] = group_id
                unique.append(phrase)
            if not unique:
                raise LexiconError(f"{source}: group {group_id} has no phrases")
            groups.append(PhraseGroup(group_id, tuple(unique)))
        if not groups:
            raise LexiconError(f"{source}: no phrase groups found")
        return cls(tuple(groups))

    @classmethod
    def from_file(cls, path: str | Path) -> "RiskPhraseLexicon":
        path = Path(path)
        return cls.from_sections(
            _parse_phrase_sections(
                path.read_text(encoding="utf-8").splitlines(), str(path)
            ),
            str(path),
        )


@dataclass(frozen=True)
class SummaryRow:
    prefix: str
    phrases: tuple[str, ...]


@dataclass(frozen=True)
class SummaryPhraseTable:
    """Prefix/phrase rows used to phrase detected topics in summaries.

    The final row is generated, not loaded: it pairs the generic prefix
    with every risk-lexicon phrase so direct risk wording surfaces in the
    summary even when no topical row fires.
    """

    rows: tuple[SummaryRow, ...]

    @classmethod
    def from_file(
        cls, path: str | Path, lexicon: "RiskPhraseLexicon | None" = None
    ) -> "SummaryPhraseTable":
        path = Path(path)
        sections = _parse_phrase_sections(
            path.read_text(encoding="utf-8").splitlines(), str(path)
        )
        lexicon = lexicon if lexicon is not None else default_risk_lexicon()
        rows = [SummaryRow(header, tuple(phrases)) for header, phrases in sections]
        rows.append(SummaryRow(GENERIC_ROW_PREFIX, lexicon.all_phrases))
        prefixes = [row.prefix for row in rows]
        if len(set(prefixes)) != len(prefixes):
            raise LexiconError(f"{path}: duplicate row prefixes")
        return cls(tuple(rows))


def _parse_phrase_sections(
    lines: Iterable[str], source: str
) -> list[tuple[str, list[str]]]:
    sections: list[tuple[str, list[str]]] = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header = line[1:].strip()
            if not header:
                raise LexiconError(f"{source}:{lineno}: empty group header")
            sections.append((header, []))
        else:
            if not sections:
                raise LexiconError(
                    f"{source}:{lineno}: phrase appears before any group header"
                )
            sections[-1][1].append(normalize_text(line))
    return sections


def _data_text(name: str) -> str:
    return resources.files("risksum.data").joinpath(name).read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def default_risk_lexicon() -> RiskPhraseLexicon:
    sections = _parse_phrase_sections(
        _data_text("risk_phrases.txt").splitlines(), "risk_phrases.txt"
    )
    return RiskPhraseLexicon.from_sections(sections, "risk_phrases.txt")


@lru_cache(maxsize=1)
def default_summary_table() -> SummaryPhraseTable:
    sections = _parse_phrase_sections(
        _data_text("summary_phrases.txt").splitlines(), "summary_phrases.txt"
    )
    rows = [SummaryRow(header, tuple(phrases)) for header, phrases in sections]
    rows.append(SummaryRow(GENERIC_ROW_PREFIX, default_risk_lexicon().all_phrases))
    return SummaryPhraseTable(tuple(rows))


def match_risk_phrases(
    text: str, lexicon: RiskPhraseLexicon | None = None
) -> list[PhraseMatch]:
    """All phrase occurrences in ``text``, overlapping ones included.

    Sorted by start offset, then end offset, then group id.
    """
    lexicon = lexicon if lexicon is not None else default_risk_lexicon()
    subject = text.replace("’", "'")
    matches: list[PhraseMatch] = []
    for canonical, group_id, pattern in lexicon._matchers:
        for found in pattern.finditer(subject):
            start, end = found.span(1)
            matches.append(
                PhraseMatch(text[start:end], canonical, group_id, start, end)
            )
    matches.sort(key=lambda m: (m.char_start, m.char_end, m.group_id))
    return matches


@dataclass(frozen=True)
class LabeledExample:
    text: str
    label: int
    post_id: str = ""
    sentence_index: int = -1


@dataclass(frozen=True)
class LabeledDataset:
    train: tuple[LabeledExample, ...]
    val: tuple[LabeledExample, ...]
    seed: int

    @property
    def counts(self) -> dict[str, dict[int, int]]:
        out: dict[str, dict[int, int]] = {}
        for split_name, rows in (("train", self.train), ("val", self.val)):
            tally = {0: 0, 1: 0}
            for row in rows:
                tally[row.label] += 1
            out[split_name] = tally
        return out


def build_weak_labeled_dataset(
    corpus: Sequence[UserTimeline],
    lexicon: RiskPhraseLexicon | None = None,
    *,
    seed: int,
    val_fraction: float = 0.2,
    balance_tolerance: int = 0,
) -> LabeledDataset:
    """Label every corpus sentence by lexicon hit and build train/val splits.

    Sentences with at least one phrase match get label 1, the rest 0. When
    negatives outnumber positives by more than ``balance_tolerance`` the
    negative set is randomly downsampled to the positive count. The same
    RNG then assigns ``val_fraction`` of the pool to the validation split
    (at least one example lands in each split). Equal seeds give equal
    datasets byte for byte; corpus order is preserved inside each split.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    if not 0 < val_fraction < 1:
        raise ValueError(f"val_fraction must be in (0, 1), got {val_fraction}")
    if balance_tolerance < 0:
        raise ValueError("balance_tolerance must be >= 0")
    lexicon = lexicon if lexicon is not None else default_risk_lexicon()

    examples: list[LabeledExample] = []
    for timeline in corpus:
        for sentence in timeline_sentences(timeline):
            label = 1 if match_risk_phrases(sentence.text, lexicon) else 0
            examples.append(
                LabeledExample(sentence.text, label, sentence.post_id, sentence.index)
            )
    positive_idx = [i for i, ex in enumerate(examples) if ex.label == 1]
    negative_idx = [i for i, ex in enumerate(examples) if ex.label == 0]
    if not positive_idx:
        raise LexiconError("lexicon matched nothing")
    if not negative_idx:
        raise LexiconError("every sentence matched the lexicon; no label-0 examples")

    rng = random.Random(seed)
    if len(negative_idx) > len(positive_idx) + balance_tolerance:
        kept = rng.sample(range(len(negative_idx)), k=len(positive_idx))
        negative_idx = [negative_idx[i] for i in sorted(kept)]

    pool = [examples[i] for i in sorted(positive_idx + negative_idx)]
    n_val = int(round(len(pool) * val_fraction))
    n_val = min(max(n_val, 1), len(pool) - 1)
    order = list(range(len(pool)))
    rng.shuffle(order)
    val_positions = set(order[:n_val])
    train = tuple(ex for i, ex in enumerate(pool) if i not in val_positions)
    val = tuple(ex for i, ex in enumerate(pool) if i in val_positions)
    return LabeledDataset(train=train, val=val, seed=seed)


def write_dataset_jsonl(
    dataset: LabeledDataset, path: str | Path, meta: dict | None = None
) -> None:
    """One row per example with ``text``, ``label``, ``split`` keys."""
    path = Path(path)
    header = {"seed": dataset.seed, "counts": dataset.counts}
    if meta:
        header.update(meta)
    with path.open("w", encoding="utf-8") as handle:
        handle.write(json.dumps({"meta": header}, ensure_ascii=False) + "\n")
        for split_name, rows in (("train", dataset.train), ("val", dataset.val)):
            for row in rows:
                record = {"text": row.text, "label": row.label, "split": split_name}
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_dataset_jsonl(path: str | Path) -> LabeledDataset:
    path = Path(path)
    seed = -1
    train: list[LabeledExample] = []
    val: list[LabeledExample] = []
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if "meta" in obj and lineno == 1:
                seed = obj["meta"].get("seed", -1)
                continue
            if obj["label"] not in (0, 1):
                raise LexiconError(f"{path}:{lineno}: label must be 0 or 1")
            target = train if obj["split"] == "train" else val
            target.append(LabeledExample(obj["text"], obj["label"]))
    return LabeledDataset(train=tuple(train), val=tuple(val), seed=seed)
