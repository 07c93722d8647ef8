"""Statement matching: edit distance, normalized similarity, response selection.

The match score between two texts is 1 - distance / maxLen, where distance
is the Levenshtein edit distance and maxLen the longer of the two lengths.
A score of 1.0 means the texts are identical (after lowercasing, which is
the only normalization the matcher applies).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .store import Statement

__all__ = [
    "levenshtein_distance",
    "similarity",
    "MatchResult",
    "find_best_match",
    "select_response",
    "SELECTION_POLICIES",
]

SELECTION_POLICIES = ("first", "random", "most-frequent")


def levenshtein_distance(a: str, b: str) -> int:
    """Minimum number of single-character edits transforming ``a`` into ``b``."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(b) > len(a):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(current[-1] + 1, previous[j] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> float:
    """Normalized similarity in [0, 1]; two empty strings count as identical."""
    max_len = max(len(a), len(b))
    if max_len == 0:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / max_len


@dataclass(frozen=True)
class MatchResult:
    statement: "Statement"
    score: float


def find_best_match(
    query: str,
    candidates: Sequence["Statement"],
    threshold: float,
) -> MatchResult | None:
    """Best candidate by lowercase text similarity, or None if below threshold.

    Ties between equal scores go to the lowest statement id, so matching is
    reproducible regardless of candidate order.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    query_lower = query.lower()
    best: "Statement | None" = None
    best_score = -1.0
    for candidate in candidates:
        score = similarity(query_lower, candidate.text.lower())
        if score > best_score or (
            score == best_score and best is not None and candidate.id < best.id
        ):
            best = candidate
            best_score = score
    if best is None or best_score < threshold:
        return None
    return MatchResult(statement=best, score=best_score)


def select_response(
    match: MatchResult,
    responses: Sequence["Statement"],
    policy: str = "first",
    rng: random.Random | None = None,
) -> "Statement":
    """Pick one response for a matched statement.

    ``first`` takes the list head, ``random`` draws uniformly from an
    explicitly supplied generator, ``most-frequent`` prefers the response
    trained most often (ties to the lowest id).
    """
    if not responses:
        raise ValueError(
            f"no responses recorded for matched statement {match.statement.id!r}"
        )
    if policy == "first":
        return responses[0]
    if policy == "random":
        if rng is None:
            raise ValueError("random selection policy requires an explicit rng")
        return rng.choice(list(responses))
    if policy == "most-frequent":
        return max(responses, key=lambda s: (s.occurrence_count, -s.id))
    raise ValueError(f"unknown selection policy {policy!r}; expected one of {SELECTION_POLICIES}")
