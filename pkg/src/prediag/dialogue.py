"""Consultation sessions: matching-backed replies, slot filling, goal tracking.

A session opens in progress and is driven toward one binary outcome. The
bot answers each turn from the statement graph when a match clears the
similarity threshold and falls back to a fixed apology otherwise. When the
user raises the consultation topic, the manager starts asking the slot
questions from the rules file; each answer fills the risk profile, and a
complete profile triggers the image-upload instruction and marks the goal
Completed. Ending a session any other way marks it Failed.

Slot schemas, trigger phrases, and all prompt strings live in a rules file
(resources/rules.json by default), not in code.
"""

from __future__ import annotations

import json
import re
import uuid
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .matching import find_best_match, select_response
from .store import KnowledgeGraph
from .textprep import normalize, preprocess

__all__ = [
    "GOAL_IN_PROGRESS",
    "GOAL_COMPLETED",
    "GOAL_FAILED",
    "RISK_LEVELS",
    "SlotSpec",
    "DialogueRules",
    "load_rules",
    "default_rules",
    "RiskProfile",
    "Session",
    "DialogueOutcome",
    "update_risk_profile",
    "assess_risk",
    "compute_gcr",
    "DialogueManager",
    "parse_script",
    "replay_script",
    "ScriptResult",
    "GcrReport",
    "run_gcr_harness",
]

GOAL_IN_PROGRESS = "InProgress"
GOAL_COMPLETED = "Completed"
GOAL_FAILED = "Failed"

RISK_LEVELS = ("unknown", "low", "medium", "high")

_SLOT_KINDS = ("age", "polarity")

# Age mentions are parsed from the normalized token string, so punctuation
# is already gone and everything is lowercase.
_AGE_PATTERNS = [
    re.compile(r"\b(\d{1,3})\s+years?\s+old\b"),
    re.compile(r"\b(?:i am|i'm|im)\s+(\d{1,3})\b"),
    re.compile(r"\bage\s+(?:is\s+)?(\d{1,3})\b"),
    re.compile(r"\bturned\s+(\d{1,3})\b"),
]


@dataclass(frozen=True)
class SlotSpec:
    name: str
    kind: str
    question: str

    def __post_init__(self):
        if self.kind not in _SLOT_KINDS:
            raise ValueError(f"unknown slot kind {self.kind!r} for slot {self.name!r}")


def _phrase(text: str) -> tuple[str, ...]:
    return tuple(normalize(text))


@dataclass(frozen=True)
class DialogueRules:
    """Parsed rules file. Phrase lists are stored as normalized token tuples."""

    fallback_reply: str
    goodbye_reply: str
    inquiry_opening: str
    acknowledgement: str
    upload_instruction: str
    recommendation: str
    slots: tuple[SlotSpec, ...]
    end_commands: frozenset[tuple[str, ...]]
    inquiry_triggers: tuple[tuple[str, ...], ...]
    affirmations: tuple[tuple[str, ...], ...]
    negations: tuple[tuple[str, ...], ...]
    age_threshold: int = 50
    age_min: int = 1
    age_max: int = 119

    @classmethod
    def from_dict(cls, raw: dict) -> "DialogueRules":
        slots = tuple(
            SlotSpec(name=s["name"], kind=s["kind"], question=s["question"])
            for s in raw["slots"]
        )
        if not slots:
            raise ValueError("rules define no slots")
        names = [s.name for s in slots]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate slot names in rules: {names}")
        return cls(
            fallback_reply=raw["fallback_reply"],
            goodbye_reply=raw["goodbye_reply"],
            inquiry_opening=raw["inquiry_opening"],
            acknowledgement=raw["acknowledgement"],
            upload_instruction=raw["upload_instruction"],
            recommendation=raw["recommendation"],
            slots=slots,
            end_commands=frozenset(_phrase(p) for p in raw["end_commands"]),
            inquiry_triggers=tuple(_phrase(p) for p in raw["inquiry_triggers"]),
            affirmations=tuple(_phrase(p) for p in raw["affirmations"]),
            negations=tuple(_phrase(p) for p in raw["negations"]),
            age_threshold=raw.get("age_threshold", 50),
            age_min=raw.get("age_min", 1),
            age_max=raw.get("age_max", 119),
        )

    def slot(self, name: str) -> SlotSpec:
        for s in self.slots:
            if s.name == name:
                return s
        raise KeyError(name)


def load_rules(path: str | Path) -> DialogueRules:
    with open(path, encoding="utf-8") as fh:
        return DialogueRules.from_dict(json.load(fh))


@lru_cache(maxsize=1)
def default_rules() -> DialogueRules:
    ref = resources.files("prediag") / "resources" / "rules.json"
    return DialogueRules.from_dict(json.loads(ref.read_text("utf-8")))


@dataclass
class RiskProfile:
    slots: dict[str, object | None]
    risk_level: str = "unknown"

    @classmethod
    def empty(cls, rules: DialogueRules) -> "RiskProfile":
        return cls(slots={s.name: None for s in rules.slots})

    def unfilled(self) -> list[str]:
        return [name for name, value in self.slots.items() if value is None]

    @property
    def complete(self) -> bool:
        return not self.unfilled()


@dataclass
class Session:
    id: str
    history: list[tuple[str, str]] = field(default_factory=list)
    risk_profile: RiskProfile | None = None
    goal_status: str = GOAL_IN_PROGRESS
    inquiry_active: bool = False
    pending_slot: str | None = None
    ended: bool = False
    # Similarity of the match behind the latest reply; None on fallback turns.
    last_match_similarity: float | None = None


@dataclass(frozen=True)
class DialogueOutcome:
    session_id: str
    completed: bool


def _contains_phrase(tokens: list[str], phrase: tuple[str, ...]) -> bool:
    """True when ``phrase`` occurs as a contiguous token run in ``tokens``."""
    n = len(phrase)
    if n == 0 or n > len(tokens):
        return False
    return any(tuple(tokens[i : i + n]) == phrase for i in range(len(tokens) - n + 1))


def _contains_any(tokens: list[str], phrases) -> bool:
    return any(_contains_phrase(tokens, p) for p in phrases)


def _extract_age(joined: str, tokens: list[str], rules: DialogueRules, pending: bool) -> int | None:
    for pattern in _AGE_PATTERNS:
        m = pattern.search(joined)
        if m:
            age = int(m.group(1))
            if rules.age_min <= age <= rules.age_max:
                return age
    if pending:
        # A bare number is accepted only as the answer to the age question.
        for token in tokens:
            if token.isdigit():
                age = int(token)
                if rules.age_min <= age <= rules.age_max:
                    return age
    return None


def _detect_polarity(tokens: list[str], rules: DialogueRules) -> str | None:
    # Negations win over affirmations so "no i do not" reads as a denial.
    if _contains_any(tokens, rules.negations):
        return "no"
    if _contains_any(tokens, rules.affirmations):
        return "yes"
    return None


def update_risk_profile(
    profile: RiskProfile,
    user_text: str,
    rules: DialogueRules,
    pending_slot: str | None = None,
) -> list[str]:
    """Fill profile slots mentioned in one user turn; returns the names filled.

    Slots are never overwritten. Age is parsed from explicit phrasing at any
    point, or from a bare number when the age question is pending. Polarity
    slots fill only as answers to their own pending question.
    """
    tokens = normalize(user_text)
    joined = " ".join(tokens)
    filled: list[str] = []
    if "age" in profile.slots and profile.slots["age"] is None:
        age = _extract_age(joined, tokens, rules, pending=pending_slot == "age")
        if age is not None:
            profile.slots["age"] = age
            filled.append("age")
    if pending_slot is not None and pending_slot != "age":
        spec = rules.slot(pending_slot)
        if spec.kind == "polarity" and profile.slots.get(pending_slot) is None:
            answer = _detect_polarity(tokens, rules)
            if answer is not None:
                profile.slots[pending_slot] = answer
                filled.append(pending_slot)
    return filled


def assess_risk(profile: RiskProfile, rules: DialogueRules) -> str:
    """Score the filled profile into low/medium/high.

    One point per affirmative indicator plus one when age reaches the
    configured threshold; 0-1 low, 2-3 medium, anything above high.
    """
    for name in (s.name for s in rules.slots):
        if profile.slots.get(name) is None:
            raise ValueError(f"required slot not filled: {name}")
    score = 0
    for spec in rules.slots:
        value = profile.slots[spec.name]
        if spec.kind == "polarity" and value == "yes":
            score += 1
        elif spec.kind == "age" and int(value) >= rules.age_threshold:
            score += 1
    if score <= 1:
        level = "low"
    elif score <= 3:
        level = "medium"
    else:
        level = "high"
    profile.risk_level = level
    return level


def compute_gcr(outcomes: list[DialogueOutcome]) -> float:
    """Goal completion rate as a percentage with two decimals."""
    if not outcomes:
        raise ValueError("cannot compute a completion rate over zero dialogues")
    completed = sum(1 for o in outcomes if o.completed)
    return round(100.0 * completed / len(outcomes), 2)


class DialogueManager:
    """Runs consultation turns against a trained statement graph.

    The manager itself is stateless across sessions; all per-conversation
    state lives on the Session object, so distinct sessions can be served
    concurrently over one read-only graph.
    """

    def __init__(
        self,
        graph: KnowledgeGraph,
        rules: DialogueRules | None = None,
        threshold: float = 0.90,
        selection_policy: str = "first",
        rng=None,
    ):
        self.graph = graph
        self.rules = rules if rules is not None else default_rules()
        self.threshold = threshold
        self.selection_policy = selection_policy
        self.rng = rng

    def create_session(self, session_id: str | None = None) -> Session:
        sid = session_id if session_id is not None else uuid.uuid4().hex
        return Session(id=sid, risk_profile=RiskProfile.empty(self.rules))

    def handle_turn(self, session: Session, user_text: str) -> str:
        """Process one user turn and return the bot reply.

        The goal status only ever moves out of InProgress: an end command
        with an incomplete profile fails the session, a completed profile
        completes it, and afterwards further turns leave it alone.
        """
        session.history.append(("user", user_text))
        session.last_match_similarity = None
        tokens = normalize(user_text)
        if tuple(tokens) in self.rules.end_commands:
            if session.goal_status == GOAL_IN_PROGRESS:
                session.goal_status = GOAL_FAILED
            session.ended = True
            session.pending_slot = None
            reply = self.rules.goodbye_reply
            session.history.append(("bot", reply))
            return reply

        filled = update_risk_profile(
            session.risk_profile, user_text, self.rules, session.pending_slot
        )
        if session.pending_slot in filled:
            session.pending_slot = None
        triggered = False
        if not session.inquiry_active and _contains_any(tokens, self.rules.inquiry_triggers):
            session.inquiry_active = True
            triggered = True

        parts = [self._base_reply(session, user_text, triggered, bool(filled))]
        if session.goal_status == GOAL_IN_PROGRESS:
            unfilled = session.risk_profile.unfilled()
            if not unfilled:
                level = assess_risk(session.risk_profile, self.rules)
                if level in ("medium", "high"):
                    parts.append(self.rules.recommendation)
                parts.append(self.rules.upload_instruction)
                session.goal_status = GOAL_COMPLETED
                session.pending_slot = None
            elif session.inquiry_active:
                spec = self.rules.slot(unfilled[0])
                parts.append(spec.question)
                session.pending_slot = spec.name

        reply = " ".join(parts)
        session.history.append(("bot", reply))
        return reply

    def finish_session(self, session: Session) -> DialogueOutcome:
        """Close a session (end of script or timeout) and label its outcome."""
        if session.goal_status == GOAL_IN_PROGRESS:
            session.goal_status = GOAL_FAILED
        session.ended = True
        return DialogueOutcome(
            session_id=session.id, completed=session.goal_status == GOAL_COMPLETED
        )

    def _base_reply(
        self, session: Session, user_text: str, triggered: bool, filled: bool
    ) -> str:
        matched = self._match_response(user_text)
        if matched is not None:
            text, score = matched
            session.last_match_similarity = score
            return text
        if triggered:
            return self.rules.inquiry_opening
        if filled:
            return self.rules.acknowledgement
        return self.rules.fallback_reply

    def _match_response(self, user_text: str) -> tuple[str, float] | None:
        processed = preprocess(user_text, self.graph.stopwords)
        if not processed.normalized_tokens or not len(self.graph):
            return None
        candidates = self.graph.search_candidates(processed)
        match = find_best_match(user_text, candidates, self.threshold)
        if match is None:
            return None
        responses = self.graph.responses_to(match.statement.text)
        if not responses:
            # Matched a conversation-final statement; nothing to say back.
            return None
        choice = select_response(
            match, responses, policy=self.selection_policy, rng=self.rng
        )
        return choice.text, match.score


# -- scripted replays ------------------------------------------------------
#
# Script files drive the goal-completion harness: the first effective line
# declares the expected terminal label, each following line is one user
# turn. Lines starting with '#' are comments.


def parse_script(text: str) -> tuple[str, list[str]]:
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    if not lines or not lines[0].lower().startswith("expect:"):
        raise ValueError("script must start with an 'expect: Completed|Failed' line")
    expected = lines[0].split(":", 1)[1].strip()
    if expected not in (GOAL_COMPLETED, GOAL_FAILED):
        raise ValueError(f"unknown expected label {expected!r}")
    turns = lines[1:]
    if not turns:
        raise ValueError("script has no user turns")
    return expected, turns


def replay_script(manager: DialogueManager, turns: list[str], session_id: str | None = None):
    """Run one scripted dialogue through a fresh session.

    Returns (session, outcome); the outcome label reflects the goal status
    after the final turn, with an unterminated session counted as Failed.
    """
    session = manager.create_session(session_id)
    for turn in turns:
        manager.handle_turn(session, turn)
    outcome = manager.finish_session(session)
    return session, outcome


@dataclass(frozen=True)
class ScriptResult:
    name: str
    expected: str
    actual: str

    @property
    def ok(self) -> bool:
        return self.expected == self.actual


@dataclass(frozen=True)
class GcrReport:
    results: tuple[ScriptResult, ...]
    gcr: float

    @property
    def all_expected(self) -> bool:
        return all(r.ok for r in self.results)


def run_gcr_harness(script_dir: str | Path, manager: DialogueManager) -> GcrReport:
    """Replay every ``*.txt`` script in a directory through fresh sessions.

    The report carries each script's expected and actual label plus the
    aggregate completion rate over the actual outcomes.
    """
    paths = sorted(Path(script_dir).glob("*.txt"))
    if not paths:
        raise ValueError(f"no dialogue scripts (*.txt) found in {script_dir}")
    results = []
    outcomes = []
    for path in paths:
        expected, turns = parse_script(path.read_text("utf-8"))
        session, outcome = replay_script(manager, turns, session_id=path.stem)
        outcomes.append(outcome)
        results.append(
            ScriptResult(name=path.name, expected=expected, actual=session.goal_status)
        )
    return GcrReport(results=tuple(results), gcr=compute_gcr(outcomes))
