"""HTTP layer: chat sessions, feature classification, health.

The app is assembled from already-loaded components (statement graph,
trained heads) so startup I/O stays in the CLI. Sessions live in memory
with an idle TTL; each one owns a lock so concurrent requests against the
same session serialize while distinct sessions proceed in parallel over
the read-only graph and models.
"""

from __future__ import annotations

import io
import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from pydantic import BaseModel, Field

from .datasets import BENIGN_SUBTYPES, MALIGNANT_SUBTYPES
from .dialogue import DialogueManager, Session
from .heads import TrainedHead, predict_proba
from .nn.snapshot import SnapshotError, load_snapshot
from .store import KnowledgeGraph

__all__ = ["SessionRegistry", "create_app"]

API_PREFIX = "/api/v1"

_SUBTYPE_PARENT = {s: "benign" for s in BENIGN_SUBTYPES}
_SUBTYPE_PARENT.update({s: "malignant" for s in MALIGNANT_SUBTYPES})


class ChatRequest(BaseModel):
    session_id: str | None = None
    text: str = Field(min_length=1)


class ChatResponse(BaseModel):
    session_id: str
    reply: str
    matched_similarity: float | None = None
    goal_status: str
    risk_level: str


class ClassifyResponse(BaseModel):
    label: str
    subtype: str | None = None
    class_names: list[str]
    confidence: list[float]
    model_id: str


class SessionView(BaseModel):
    session_id: str
    history: list[tuple[str, str]]
    risk_profile: dict
    risk_level: str
    goal_status: str


class _SessionEntry:
    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.last_access = time.monotonic()


class SessionRegistry:
    """In-memory session table with idle expiry."""

    def __init__(self, manager: DialogueManager, ttl_seconds: float = 1800.0):
        self.manager = manager
        self.ttl = ttl_seconds
        self._entries: dict[str, _SessionEntry] = {}
        self._lock = threading.Lock()

    def _sweep(self, now: float) -> None:
        dead = [k for k, e in self._entries.items() if now - e.last_access > self.ttl]
        for k in dead:
            del self._entries[k]

    def get_or_create(self, session_id: str | None) -> _SessionEntry:
        now = time.monotonic()
        with self._lock:
            self._sweep(now)
            if session_id is None:
                session_id = uuid.uuid4().hex
            entry = self._entries.get(session_id)
            if entry is None:
                entry = _SessionEntry(self.manager.create_session(session_id))
                self._entries[session_id] = entry
            entry.last_access = now
            return entry

    def get(self, session_id: str) -> _SessionEntry | None:
        now = time.monotonic()
        with self._lock:
            self._sweep(now)
            entry = self._entries.get(session_id)
            if entry is not None:
                entry.last_access = now
            return entry


def _parse_classify_payload(body: bytes, expected_shape: tuple[int, ...]) -> np.ndarray:
    if not body:
        raise HTTPException(status_code=400, detail="empty request body")
    try:
        tensors, _ = load_snapshot(io.BytesIO(body))
    except SnapshotError as exc:
        raise HTTPException(
            status_code=400, detail=f"payload is not a feature container: {exc}"
        ) from exc
    if "features" in tensors:
        features = tensors["features"]
    elif len(tensors) == 1:
        features = next(iter(tensors.values()))
    else:
        raise HTTPException(
            status_code=400,
            detail="feature container must hold a 'features' entry or exactly one array",
        )
    features = np.asarray(features, dtype=np.float64)
    if features.shape == expected_shape:
        features = features[None, ...]
    if features.shape != (1, *expected_shape):
        raise HTTPException(
            status_code=400,
            detail=(
                f"feature shape {features.shape} does not match model input "
                f"{expected_shape} (a leading batch axis of 1 is allowed)"
            ),
        )
    return features


def create_app(
    graph: KnowledgeGraph,
    models: dict[str, TrainedHead] | None = None,
    rules=None,
    threshold: float = 0.90,
    session_ttl: float = 1800.0,
    selection_policy: str = "first",
    rng=None,
) -> FastAPI:
    manager = DialogueManager(
        graph,
        rules=rules,
        threshold=threshold,
        selection_policy=selection_policy,
        rng=rng,
    )
    registry = SessionRegistry(manager, ttl_seconds=session_ttl)
    models = dict(models or {})
    app = FastAPI(title="pre-diagnosis service", version="0.1.0")
    app.state.registry = registry
    app.state.models = models

    @app.get(f"{API_PREFIX}/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post(f"{API_PREFIX}/chat", response_model=ChatResponse)
    def chat(req: ChatRequest) -> ChatResponse:
        entry = registry.get_or_create(req.session_id)
        with entry.lock:
            reply = manager.handle_turn(entry.session, req.text)
            return ChatResponse(
                session_id=entry.session.id,
                reply=reply,
                matched_similarity=entry.session.last_match_similarity,
                goal_status=entry.session.goal_status,
                risk_level=entry.session.risk_profile.risk_level,
            )

    @app.get(API_PREFIX + "/session/{session_id}", response_model=SessionView)
    def session_view(session_id: str) -> SessionView:
        entry = registry.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        with entry.lock:
            s = entry.session
            return SessionView(
                session_id=s.id,
                history=list(s.history),
                risk_profile=dict(s.risk_profile.slots),
                risk_level=s.risk_profile.risk_level,
                goal_status=s.goal_status,
            )

    @app.post(f"{API_PREFIX}/classify", response_model=ClassifyResponse)
    async def classify(request: Request, model_id: str) -> ClassifyResponse:
        head = models.get(model_id)
        if head is None:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}")
        body = await request.body()
        features = _parse_classify_payload(body, tuple(head.config.input_shape))
        probs = predict_proba(head.model, features)[0]
        top = int(np.argmax(probs))
        top_name = head.class_names[top]
        if top_name in _SUBTYPE_PARENT:
            label = _SUBTYPE_PARENT[top_name]
            subtype = top_name
        else:
            label = top_name
            subtype = None
        return ClassifyResponse(
            label=label,
            subtype=subtype,
            class_names=list(head.class_names),
            confidence=[float(p) for p in probs],
            model_id=model_id,
        )

    return app
