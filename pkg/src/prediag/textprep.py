"""Text preprocessing for statement matching and retrieval.

A sentence passes through four stages: normalization, stopword removal,
stemming, and pairing of neighboring stems. The paired string is what the
statement store indexes, so two sentences sharing a pair of adjacent
content words can find each other even in a large corpus.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

__all__ = [
    "ProcessedText",
    "preprocess",
    "normalize",
    "stem_token",
    "load_stopwords",
    "default_stopwords",
]

# Tokens shorter than this pass through stemming unchanged, so stemming
# can never produce an empty token.
MIN_STEM_LENGTH = 3

# Letters, digits and apostrophes survive normalization; everything else
# acts as a token separator.
_NON_TOKEN = re.compile(r"[^a-z0-9']+")


@dataclass(frozen=True)
class ProcessedText:
    """A sentence after all four preprocessing stages.

    ``content_tokens`` holds the stopword-filtered tokens before stemming;
    ``content_stems`` the same tokens after stemming. ``bigram_pair_string``
    joins each neighboring stem pair into one token (a single stem stands
    for itself, so one-content-word sentences stay searchable).
    """

    original: str
    normalized_tokens: tuple[str, ...]
    content_tokens: tuple[str, ...]
    content_stems: tuple[str, ...]
    bigram_pair_string: str

    @property
    def bigrams(self) -> tuple[str, ...]:
        return tuple(self.bigram_pair_string.split())


def stem_token(token: str) -> str:
    """Stem a token by stripping its first and last character.

    Tokens shorter than ``MIN_STEM_LENGTH`` are returned unchanged.
    """
    if not token:
        raise ValueError("cannot stem an empty token")
    if len(token) < MIN_STEM_LENGTH:
        return token
    return token[1:-1]


def normalize(text: str) -> list[str]:
    """Lowercase, strip punctuation and collapse whitespace into tokens.

    Apostrophes survive only inside a token ("don't" keeps its apostrophe,
    quoted words lose the quotes).
    """
    cleaned = _NON_TOKEN.sub(" ", text.lower())
    tokens = []
    for raw in cleaned.split():
        token = raw.strip("'")
        if token:
            tokens.append(token)
    return tokens


def preprocess(text: str, stopwords: frozenset[str] | None = None) -> ProcessedText:
    """Run the four-stage pipeline over one sentence.

    Empty input is fine and yields a ProcessedText with empty fields.
    """
    if stopwords is None:
        stopwords = default_stopwords()
    normalized = normalize(text)
    content = [t for t in normalized if t not in stopwords]
    stems = [stem_token(t) for t in content]
    if len(stems) >= 2:
        bigram_pair_string = " ".join(
            stems[i] + stems[i + 1] for i in range(len(stems) - 1)
        )
    elif stems:
        bigram_pair_string = stems[0]
    else:
        bigram_pair_string = ""
    return ProcessedText(
        original=text,
        normalized_tokens=tuple(normalized),
        content_tokens=tuple(content),
        content_stems=tuple(stems),
        bigram_pair_string=bigram_pair_string,
    )


def _parse_stopwords(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        word = line.strip().lower()
        if word and not word.startswith("#"):
            words.add(word)
    return frozenset(words)


def load_stopwords(path) -> frozenset[str]:
    """Load a stopword list: one word per line, '#' lines are comments."""
    with open(path, encoding="utf-8") as fh:
        return _parse_stopwords(fh.read())


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    text = (resources.files("prediag") / "resources" / "stopwords.txt").read_text("utf-8")
    return _parse_stopwords(text)
