"""Corpus data model: user timelines, JSONL ingestion, punctuation segmentation.

Posts are split into sentences on punctuation runs (``. ! ? : ;`` by
default). The source material prints the boundary set as ``(.,!?:;)``;
treating the comma as a boundary shreds multi-clause sentences, so it is
excluded by default and available via :data:`COMMA_DELIMITERS`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

DEFAULT_DELIMITERS = ".!?:;"
COMMA_DELIMITERS = ".,!?:;"

_LEVEL_VALUES = {"low", "moderate", "high", "unknown"}


class RiskLevel(Enum):
    """Expert-assigned per-user risk level."""

    LOW = "low"
    MODERATE = "moderate"
    HIGH = "high"
    UNKNOWN = "unknown"

    @classmethod
    def from_string(cls, value: str) -> "RiskLevel":
        if value not in _LEVEL_VALUES:
            raise ValueError(f"unknown risk level {value!r}")
        return cls(value)


class CorpusError(ValueError):
    """Raised when a corpus file violates the JSONL schema."""


@dataclass(frozen=True)
class Post:
    post_id: str
    user_id: str
    text: str
    timestamp: str | None = None


@dataclass(frozen=True)
class Sentence:
    """A sentence span inside one post.

    ``char_start``/``char_end`` are half-open character offsets into the
    original post text; ``text`` equals that exact substring with the
    surrounding whitespace already excluded from the span.
    """

    post_id: str
    index: int
    text: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class UserTimeline:
    user_id: str
    expert_level: RiskLevel
    posts: tuple[Post, ...]


def segment_post(
    text: str,
    post_id: str = "",
    delimiters: str = DEFAULT_DELIMITERS,
) -> list[Sentence]:
    """Split ``text`` into sentence spans at punctuation runs.

    Delimiter characters attach to the preceding sentence and consecutive
    delimiters collapse into a single boundary. Whitespace between
    sentences is skipped (it belongs to no span), so concatenating the
    spans plus the skipped characters reproduces the input exactly.
    """
    sentences: list[Sentence] = []

    def emit(raw_start: int, raw_end: int) -> None:
        start, end = raw_start, raw_end
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            sentences.append(
                Sentence(post_id, len(sentences), text[start:end], start, end)
            )

    n = len(text)
    seg_start = 0
    i = 0
    while i < n:
        if text[i] in delimiters:
            j = i
            while j < n and text[j] in delimiters:
                j += 1
            emit(seg_start, j)
            seg_start = j
            i = j
        else:
            i += 1
    emit(seg_start, n)
    return sentences


def timeline_sentences(
    timeline: UserTimeline, delimiters: str = DEFAULT_DELIMITERS
) -> list[Sentence]:
    """All sentences of a timeline, post order preserved."""
    out: list[Sentence] = []
    for post in timeline.posts:
        out.extend(segment_post(post.text, post.post_id, delimiters))
    return out


def _parse_line(obj: object, where: str) -> tuple[Post, RiskLevel]:
    if not isinstance(obj, dict):
        raise CorpusError(f"{where}: expected a JSON object")
    for key in ("user_id", "post_id", "text"):
        if key not in obj:
            raise CorpusError(f"{where}: missing required key {key!r}")
        if not isinstance(obj[key], str):
            raise CorpusError(f"{where}: key {key!r} must be a string")
    timestamp = obj.get("timestamp")
    if timestamp is not None and not isinstance(timestamp, str):
        raise CorpusError(f"{where}: key 'timestamp' must be a string")
    raw_level = obj.get("expert_level")
    if raw_level is None:
        level = RiskLevel.UNKNOWN
    elif isinstance(raw_level, str) and raw_level in _LEVEL_VALUES:
        level = RiskLevel.from_string(raw_level)
    else:
        raise CorpusError(f"{where}: invalid expert_level {raw_level!r}")
    post = Post(
        post_id=obj["post_id"],
        user_id=obj["user_id"],
        text=obj["text"],
        timestamp=timestamp,
    )
    return post, level


def load_corpus(path: str | Path) -> list[UserTimeline]:
    """Read a JSONL corpus and group posts into per-user timelines.

    One JSON object per line with keys ``user_id``, ``post_id``, ``text``
    and optional ``timestamp`` / ``expert_level``. Posts are ordered by
    timestamp when every post of the user carries one, else input order.
    """
    path = Path(path)
    posts_by_user: dict[str, list[Post]] = {}
    levels: dict[str, RiskLevel] = {}
    seen_posts: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: invalid JSON ({exc.msg})") from exc
            post, level = _parse_line(obj, where)
            if post.post_id in seen_posts:
                raise CorpusError(f"{where}: duplicate post_id {post.post_id!r}")
            seen_posts.add(post.post_id)
            posts_by_user.setdefault(post.user_id, []).append(post)
            known = levels.get(post.user_id, RiskLevel.UNKNOWN)
            if level is not RiskLevel.UNKNOWN:
                if known is not RiskLevel.UNKNOWN and known is not level:
                    raise CorpusError(
                        f"{where}: conflicting expert_level for user "
                        f"{post.user_id!r} ({known.value} vs {level.value})"
                    )
                levels[post.user_id] = level
    timelines = []
    for user_id, posts in posts_by_user.items():
        if all(p.timestamp is not None for p in posts):
            posts = sorted(posts, key=lambda p: p.timestamp or "")
        timelines.append(
            UserTimeline(
                user_id=user_id,
                expert_level=levels.get(user_id, RiskLevel.UNKNOWN),
                posts=tuple(posts),
            )
        )
    return timelines


def concatenated_posts(timeline: UserTimeline) -> str:
    """Per-user post aggregation used for generator prompts."""
    return "\n".join(post.text for post in timeline.posts)


def write_sentences_jsonl(
    timelines: Iterable[UserTimeline],
    path: str | Path,
    delimiters: str = DEFAULT_DELIMITERS,
    meta: dict | None = None,
) -> None:
    """Write one JSON object per sentence with user, post and span fields."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        if meta is not None:
            handle.write(json.dumps({"meta": meta}, ensure_ascii=False) + "\n")
        for timeline in timelines:
            for sentence in timeline_sentences(timeline, delimiters):
                record = {
                    "user_id": timeline.user_id,
                    "post_id": sentence.post_id,
                    "index": sentence.index,
                    "text": sentence.text,
                    "char_start": sentence.char_start,
                    "char_end": sentence.char_end,
                }
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
