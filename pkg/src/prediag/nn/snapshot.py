"""Model snapshots: named float64 tensors plus a JSON metadata entry.

The container is a plain .npz archive. Every parameter and buffer is stored
under its qualified name; one reserved entry, ``__meta__``, holds a JSON
document with at least ``snapshot_version``. Readers reject unknown
versions instead of guessing.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = ["SNAPSHOT_VERSION", "SnapshotError", "save_snapshot", "load_snapshot"]

SNAPSHOT_VERSION = 1

_META_KEY = "__meta__"


class SnapshotError(Exception):
    pass


def save_snapshot(path: str | Path, tensors: dict[str, np.ndarray], meta: dict) -> None:
    if _META_KEY in tensors:
        raise SnapshotError(f"tensor name {_META_KEY!r} is reserved")
    payload = dict(meta)
    payload["snapshot_version"] = SNAPSHOT_VERSION
    arrays = {k: np.asarray(v, dtype=np.float64) for k, v in tensors.items()}
    arrays[_META_KEY] = np.frombuffer(
        json.dumps(payload, ensure_ascii=False).encode("utf-8"), dtype=np.uint8
    )
    np.savez(path, **arrays)


def load_snapshot(path) -> tuple[dict[str, np.ndarray], dict]:
    """Read a container from a path or a binary file-like object."""
    try:
        archive = np.load(path)
    except (OSError, ValueError, EOFError) as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    with archive:
        if _META_KEY not in archive.files:
            raise SnapshotError(f"snapshot {path} has no metadata entry")
        try:
            meta = json.loads(bytes(archive[_META_KEY]).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise SnapshotError(f"snapshot {path} has unreadable metadata") from exc
        version = meta.get("snapshot_version")
        if version != SNAPSHOT_VERSION:
            raise SnapshotError(
                f"snapshot {path} has version {version!r}, expected {SNAPSHOT_VERSION}"
            )
        tensors = {name: archive[name] for name in archive.files if name != _META_KEY}
    return tensors, meta
