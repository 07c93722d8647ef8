"""Statement storage: a graph of statements and response edges.

Training loads conversations line by line; each line becomes a statement
pointing back at the line before it. Statements shared between
conversations are stored once, so their responses from every conversation
merge on the same node. A bigram index over the preprocessed statement
text serves candidate retrieval for the matcher.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .textprep import ProcessedText, preprocess

__all__ = [
    "SCHEMA_VERSION",
    "StoreError",
    "StoreFormatError",
    "Statement",
    "KnowledgeGraph",
    "save_store",
    "load_store",
]

SCHEMA_VERSION = 1


class StoreError(Exception):
    """Raised for invalid inserts and unreadable corpus files."""


class StoreFormatError(StoreError):
    """Raised when a store snapshot cannot be parsed or has a foreign version."""


@dataclass
class Statement:
    id: int
    text: str
    processed: ProcessedText
    in_response_to: str | None = None
    tag: str | None = None
    occurrence_count: int = 1


class KnowledgeGraph:
    """In-memory statement graph with a bigram retrieval index.

    ``response_edges`` maps a statement's text to the ids recorded as
    responses to it; ``bigram_index`` maps each bigram token to the ids of
    statements whose pair string contains it. Many readers may search
    concurrently; training and persistence require exclusive access.
    """

    def __init__(self, stopwords: frozenset[str] | None = None):
        self.stopwords = stopwords
        self.statements: dict[int, Statement] = {}
        self.response_edges: dict[str, set[int]] = {}
        self.bigram_index: dict[str, set[int]] = {}
        self._by_key: dict[tuple[str, str | None], int] = {}
        self._next_id = 1

    def __len__(self) -> int:
        return len(self.statements)

    # -- inserts ---------------------------------------------------------

    def insert_statement(
        self,
        text: str,
        in_response_to: str | None = None,
        tag: str | None = None,
    ) -> int:
        """Store one statement; returns its id.

        Re-inserting an identical (text, in_response_to) pair increments the
        existing statement's occurrence count instead of duplicating it.
        """
        processed = preprocess(text, self.stopwords)
        if not processed.normalized_tokens:
            raise StoreError(f"statement is empty after normalization: {text!r}")
        key = (text, in_response_to)
        existing = self._by_key.get(key)
        if existing is not None:
            self.statements[existing].occurrence_count += 1
            return existing
        statement = Statement(
            id=self._next_id,
            text=text,
            processed=processed,
            in_response_to=in_response_to,
            tag=tag,
        )
        self._next_id += 1
        self._index_statement(statement)
        return statement.id

    def _index_statement(self, statement: Statement) -> None:
        self.statements[statement.id] = statement
        self._by_key[(statement.text, statement.in_response_to)] = statement.id
        if statement.in_response_to is not None:
            self.response_edges.setdefault(statement.in_response_to, set()).add(statement.id)
        for token in set(statement.processed.bigrams):
            self.bigram_index.setdefault(token, set()).add(statement.id)

    # -- lookups ---------------------------------------------------------

    def responses_to(self, text: str) -> list[Statement]:
        """Responses recorded for a statement text, ordered by id."""
        return [self.statements[i] for i in sorted(self.response_edges.get(text, ()))]

    def search_candidates(self, query: ProcessedText, limit: int = 50) -> list[Statement]:
        """Up to ``limit`` statements ranked by shared bigram count.

        Falls back to the lowest-id statements when the query has no bigrams
        or shares none with the store, so short inputs still reach the
        matcher.
        """
        if limit < 1:
            raise ValueError(f"limit must be >= 1, got {limit}")
        shared: dict[int, int] = {}
        for token in set(query.bigrams):
            for sid in self.bigram_index.get(token, ()):
                shared[sid] = shared.get(sid, 0) + 1
        if shared:
            ranked = sorted(shared, key=lambda sid: (-shared[sid], sid))[:limit]
        else:
            ranked = sorted(self.statements)[:limit]
        return [self.statements[sid] for sid in ranked]

    # -- training --------------------------------------------------------

    def train_from_list(self, lines: list[str], tag: str | None = None) -> int:
        """Train one conversation: line i responds to line i-1.

        Returns the number of insert operations performed (repeats of an
        already-known pair still count as one operation each).
        """
        if not lines:
            raise StoreError("cannot train from an empty conversation")
        previous: str | None = None
        inserted = 0
        for line in lines:
            self.insert_statement(line, in_response_to=previous, tag=tag)
            inserted += 1
            previous = line
        return inserted

    def train_from_files(self, paths: list[str | Path]) -> int:
        """Train from corpus files, one statement per line.

        Blank lines separate conversations within a file. Every file is read
        and validated up front, so a missing path or a bad encoding leaves
        the graph untouched.
        """
        conversations: list[tuple[str, list[str]]] = []
        for path in paths:
            p = Path(path)
            if not p.is_file():
                raise StoreError(f"corpus file not found: {path}")
            try:
                text = p.read_text("utf-8")
            except UnicodeDecodeError as exc:
                raise StoreError(f"corpus file {path} is not valid UTF-8: {exc}") from exc
            for conversation in _split_conversations(text):
                conversations.append((p.name, conversation))
        inserted = 0
        for tag, lines in conversations:
            inserted += self.train_from_list(lines, tag=tag)
        return inserted


def _split_conversations(text: str) -> list[list[str]]:
    conversations: list[list[str]] = []
    current: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if line:
            current.append(line)
        elif current:
            conversations.append(current)
            current = []
    if current:
        conversations.append(current)
    return conversations


# -- persistence ---------------------------------------------------------
#
# Snapshot format: JSON Lines. The first record is a header carrying
# schema_version and the custom stopword list (null means the packaged
# default); each following record is one statement. Response edges and the
# bigram index are rebuilt on load.


def save_store(graph: KnowledgeGraph, path: str | Path) -> None:
    header = {
        "schema_version": SCHEMA_VERSION,
        "stopwords": sorted(graph.stopwords) if graph.stopwords is not None else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for sid in sorted(graph.statements):
            s = graph.statements[sid]
            record = {
                "id": s.id,
                "text": s.text,
                "in_response_to": s.in_response_to,
                "tag": s.tag,
                "occurrence_count": s.occurrence_count,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_store(path: str | Path) -> KnowledgeGraph:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise StoreFormatError(f"store snapshot {path} is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise StoreFormatError(f"store snapshot {path} has an unreadable header") from exc
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise StoreFormatError(
            f"store snapshot {path} has schema_version {version!r}, expected {SCHEMA_VERSION}"
        )
    stopwords = header.get("stopwords")
    graph = KnowledgeGraph(stopwords=frozenset(stopwords) if stopwords is not None else None)
    max_id = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StoreFormatError(f"{path}:{lineno}: unreadable statement record") from exc
        statement = Statement(
            id=record["id"],
            text=record["text"],
            processed=preprocess(record["text"], graph.stopwords),
            in_response_to=record.get("in_response_to"),
            tag=record.get("tag"),
            occurrence_count=record.get("occurrence_count", 1),
        )
        graph._index_statement(statement)
        max_id = max(max_id, statement.id)
    graph._next_id = max_id + 1
    return graph
