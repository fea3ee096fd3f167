"""Independent reference implementations shared across test modules.

These deliberately avoid the library's own code paths: matching is a
character-walk over every start position, selection is a direct greedy
re-derivation, quartiles are computed by hand from a sorted copy.
"""

from __future__ import annotations


def _try_phrase_at(norm: str, start: int, phrase: str) -> int | None:
    """Return the end offset if ``phrase`` matches ``norm`` at ``start``."""
    tokens = phrase.split()
    j = start
    for idx, token in enumerate(tokens):
        if idx:
            if j >= len(norm) or not norm[j].isspace():
                return None
            while j < len(norm) and norm[j].isspace():
                j += 1
        if norm[j : j + len(token)] != token:
            return None
        j += len(token)
    if phrase[0].isalnum() and start > 0 and norm[start - 1].isalnum():
        return None
    if phrase[-1].isalnum() and j < len(norm) and norm[j].isalnum():
        return None
    return j


def oracle_phrase_matches(text: str, lexicon) -> list[tuple[int, int, int, str]]:
    """Try every lexicon phrase at every position with boundary checks.

    Returns (char_start, char_end, group_id, canonical) tuples, sorted.
    """
    norm = text.replace("’", "'").lower()
    found = []
    for group in lexicon.groups:
        for phrase in group.phrases:
            for start in range(len(norm)):
                end = _try_phrase_at(norm, start, phrase)
                if end is not None:
                    found.append((start, end, group.group_id, phrase))
    return sorted(found)


def oracle_sentence_hits(text: str, lexicon) -> bool:
    """Does any lexicon phrase occur anywhere in ``text``?"""
    return bool(oracle_phrase_matches(text, lexicon))


def oracle_candidate_windows(text: str, min_words: int) -> set[str]:
    """Brute-force window enumeration after independent token cleanup."""
    import re

    words = []
    for raw in text.split():
        token = re.sub(r"[*,]+$", "", re.sub(r"^[*,]+", "", raw))
        if not token:
            continue
        if token[-1] in ".)" and token[:-1].isdigit() and token[:-1]:
            continue
        words.append(token.lower())
    out: set[str] = set()
    for width in range(min_words, len(words) + 1):
        for start in range(len(words) - width + 1):
            out.add(" ".join(words[start : start + width]))
    return out


def oracle_greedy_selection(items: list[dict], budget: int):
    """Straight-line re-derivation of the two-stage budgeted selection.

    ``items`` are dicts with keys ``key``, ``words``, ``risk_positive``,
    ``p_negative``, in document order. Returns (selection, total) where
    selection is a list of (key, provenance).
    """
    selection = []
    total = 0
    for item in items:
        if item["risk_positive"]:
            selection.append((item["key"], "risk"))
            total += item["words"]
    rest = [item for item in items if not item["risk_positive"]]
    rest.sort(key=lambda item: -item["p_negative"])
    for item in rest:
        if total + item["words"] <= budget:
            selection.append((item["key"], "sentiment"))
            total += item["words"]
        else:
            break
    return selection, total


def oracle_quartiles(values: list[float]) -> tuple[float, float, float, float, float]:
    """Min, Q1, median, Q3, max via sort + linear interpolation."""
    ordered = sorted(values)
    n = len(ordered)
    if n == 0:
        raise ValueError("no values")

    def at(q: float) -> float:
        pos = q * (n - 1)
        lo = int(pos)
        hi = min(lo + 1, n - 1)
        frac = pos - lo
        return ordered[lo] * (1 - frac) + ordered[hi] * frac

    return (ordered[0], at(0.25), at(0.5), at(0.75), ordered[-1])
