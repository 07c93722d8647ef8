"""Application configuration shared by the CLI and the HTTP service."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

__all__ = ["AppConfig", "load_config"]


@dataclass(frozen=True)
class AppConfig:
    similarity_threshold: float = 0.90
    stopwords: str | None = None  # path to a stopword list; None = packaged default
    rules: str | None = None  # path to a dialogue rules file; None = packaged default
    model_dir: str | None = None
    store: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    session_ttl_seconds: float = 1800.0
    selection_policy: str = "first"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValueError(
                f"similarity_threshold must be in [0, 1], got {self.similarity_threshold}"
            )
        if self.session_ttl_seconds <= 0:
            raise ValueError("session_ttl_seconds must be positive")


def load_config(path: str | Path) -> AppConfig:
    """Read a JSON config file; unknown keys are rejected, missing keys default."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(AppConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"config file {path} has unknown keys: {sorted(unknown)}")
    return AppConfig(**raw)
