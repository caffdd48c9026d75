"""Agent profiles: one interaction agent per stakeholder role plus the
supervisor, each with a signed card, a tool whitelist, and the duty-matrix
activities it may engage in."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..a2a.model import AgentCard, card_signing_bytes
from ..crypto import CardSigner
from ..policy import RaciMatrix, matrix_role

SHORT_TERM_WINDOW = 20  # messages of task context a policy may look back on

ROLE_CAPABILITIES: dict[str, list[str]] = {
    "cco": ["set-okr", "status-query"],
    "business-manager": ["set-kpi-target", "approve-deployment", "status-query"],
    "data-scientist": ["register-version", "request-retrain", "status-query"],
    "audit-manager": ["audit-decision", "export-audit-report", "status-query"],
    "value-ethics-manager": ["flag-attribute", "resolve-ethics", "status-query"],
    "customer": [
        "apply-loan",
        "provide-application-fields",
        "confirm-terms",
        "file-complaint",
        "status-query",
    ],
    "controller": [
        "intent-dispatch",
        "role-resolution",
        "policy-enforcement",
        "a2a-orchestration",
    ],
}

ROLE_TOOLS: dict[str, list[str]] = {
    "cco": [],
    "business-manager": [],
    "data-scientist": ["trainLoanModel"],
    "audit-manager": [],
    "value-ethics-manager": [],
    "customer": ["getLoanDecision", "crmLookup", "crmUpdate"],
    "controller": ["getLoanDecision"],
}


def role_agent_id(role: str) -> str:
    return "hada-controller" if role == "controller" else f"{role}-agent"


class AgentMemory:
    """Per-agent long-term notes (JSON file) + the short-term window size."""

    def __init__(self, path: Path | None = None) -> None:
        self._path = path
        self._lock = threading.Lock()
        self._notes: dict[str, dict[str, Any]] = {}
        if path is not None and path.exists():
            try:
                self._notes = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError):
                self._notes = {}

    def note(self, agent_id: str, key: str, value: Any) -> None:
        with self._lock:
            self._notes.setdefault(agent_id, {})[key] = value
            if self._path is not None:
                self._path.write_text(json.dumps(self._notes, indent=2, sort_keys=True))

    def recall(self, agent_id: str, key: str, default: Any = None) -> Any:
        with self._lock:
            return self._notes.get(agent_id, {}).get(key, default)

    def all_notes(self, agent_id: str) -> dict[str, Any]:
        with self._lock:
            return dict(self._notes.get(agent_id, {}))


@dataclass
class AgentProfile:
    role: str
    agent_id: str
    display_name: str
    capabilities: list[str]
    allowed_tools: list[str]
    allowed_activities: list[str]
    card: AgentCard | None = None
    dialog_policy: str = "scripted"
    memory: AgentMemory | None = None
    short_term_window: int = SHORT_TERM_WINDOW


def build_profiles(
    matrix: RaciMatrix,
    signer: CardSigner,
    base_url: str,
    memory: AgentMemory,
    dialog_policy: str = "scripted",
) -> dict[str, AgentProfile]:
    """One profile per role; activities derive from the duty matrix (R/A/C)."""
    from ..policy import ROLE_NAMES

    profiles: dict[str, AgentProfile] = {}
    for role in ROLE_CAPABILITIES:
        activities = [
            activity_id
            for activity_id in matrix.activities
            if matrix.assignment(matrix_role(role), activity_id) & {"R", "A", "C"}
        ]
        agent_id = role_agent_id(role)
        card = AgentCard(
            agent_id=agent_id,
            name=ROLE_NAMES.get(matrix_role(role), role),
            capabilities=list(ROLE_CAPABILITIES[role]),
            endpoint=f"{base_url}/agents/{role}/a2a",
            auth_modes=["bearer-token"],
            version="1.0.0",
        )
        card.signature = signer.sign(card_signing_bytes(card))
        profiles[role] = AgentProfile(
            role=role,
            agent_id=agent_id,
            display_name=card.name,
            capabilities=card.capabilities,
            allowed_tools=list(ROLE_TOOLS[role]),
            allowed_activities=activities,
            card=card,
            dialog_policy=dialog_policy,
            memory=memory,
        )
    return profiles
