"""Duty-matrix authorization.

Each governed activity assigns every role a subset of R/A/C/I. Performing an
activity requires R or A; C roles must be brought into the flow and I roles
notified, so ``authorize`` returns those duty lists for callers to discharge.
The matrix ships as a data file (role/duty layouts are organisation
configuration, not code) and can be hot-reloaded; loading re-validates the
singular-accountability and at-least-one-responsible rules.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import HadaError, NotFound, PolicyDenied

DUTY_LETTERS = frozenset("RACI")

ROLES = (
    "cco",
    "business-manager",
    "data-scientist",
    "customer",
    "audit-manager",
    "value-ethics-manager",
    "hada",
)

ROLE_NAMES = {
    "cco": "Chief Credit Officer",
    "business-manager": "Business Manager",
    "data-scientist": "Data Scientist",
    "customer": "Customer",
    "audit-manager": "Audit Manager",
    "value-ethics-manager": "Value & Ethics Manager",
    "hada": "HADA Controller",
}

# The controller agent acts under the matrix role "hada".
AGENT_ROLE_ALIASES = {"controller": "hada"}


def matrix_role(role: str) -> str:
    return AGENT_ROLE_ALIASES.get(role, role)


@dataclass
class Activity:
    activity_id: str
    description: str
    assignments: dict[str, frozenset[str]]


@dataclass
class Authorization:
    allowed: bool
    actor: str
    activity_id: str
    mode: str
    assignment: frozenset[str]
    accountable: str | None
    consulted: list[str] = field(default_factory=list)
    informed: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "allowed": self.allowed,
            "actor": self.actor,
            "activity": self.activity_id,
            "mode": self.mode,
            "assignment": "".join(sorted(self.assignment)),
            "accountable": self.accountable,
            "consulted": self.consulted,
            "informed": self.informed,
        }


class RaciMatrix:
    def __init__(self, roles: list[str], activities: list[Activity]) -> None:
        self.roles = roles
        self.activities = {a.activity_id: a for a in activities}
        self.ordered = activities

    @classmethod
    def load(cls, source: str | Path | dict[str, Any]) -> "RaciMatrix":
        if isinstance(source, (str, Path)):
            try:
                document = json.loads(Path(source).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise HadaError("malformed-matrix", f"cannot read matrix: {exc}") from exc
        else:
            document = source
        roles = document.get("roles") or []
        rows = document.get("activities") or []
        if not roles or not rows:
            raise HadaError("malformed-matrix", "matrix needs roles and activities")
        activities: list[Activity] = []
        seen: set[str] = set()
        for row in rows:
            activity_id = row.get("id", "")
            if not activity_id or activity_id in seen:
                raise HadaError("malformed-matrix", f"bad or duplicate activity id '{activity_id}'")
            seen.add(activity_id)
            assignments: dict[str, frozenset[str]] = {}
            for role, letters in (row.get("assignments") or {}).items():
                if role not in roles:
                    raise HadaError("malformed-matrix", f"unknown role '{role}' on '{activity_id}'")
                duty = frozenset(letters)
                if not duty or not duty <= DUTY_LETTERS:
                    raise HadaError("malformed-matrix", f"bad duty '{letters}' on '{activity_id}'")
                assignments[role] = duty
            accountable = [r for r, d in assignments.items() if "A" in d]
            responsible = [r for r, d in assignments.items() if "R" in d]
            if len(accountable) != 1:
                raise HadaError(
                    "malformed-matrix",
                    f"activity '{activity_id}' must have exactly one accountable role, found {len(accountable)}",
                )
            if not responsible:
                raise HadaError("malformed-matrix", f"activity '{activity_id}' has no responsible role")
            activities.append(Activity(activity_id, row.get("description", ""), assignments))
        return cls(list(roles), activities)

    def assignment(self, actor: str, activity_id: str) -> frozenset[str]:
        activity = self.activities.get(activity_id)
        if activity is None:
            raise NotFound("unknown-activity", activity_id)
        return activity.assignments.get(matrix_role(actor), frozenset())

    def accountable_for(self, activity_id: str) -> str | None:
        activity = self.activities.get(activity_id)
        if activity is None:
            raise NotFound("unknown-activity", activity_id)
        for role, duty in activity.assignments.items():
            if "A" in duty:
                return role
        return None

    def roles_with(self, activity_id: str, letter: str) -> list[str]:
        activity = self.activities.get(activity_id)
        if activity is None:
            raise NotFound("unknown-activity", activity_id)
        return [r for r in self.roles if letter in activity.assignments.get(r, frozenset())]

    def authorize(self, actor: str, activity_id: str, mode: str = "perform") -> Authorization:
        assignment = self.assignment(actor, activity_id)
        if mode == "perform":
            allowed = bool(assignment & {"R", "A"})
        elif mode == "consult":
            allowed = "C" in assignment
        else:
            raise HadaError("unknown-activity", f"unknown authorization mode '{mode}'")
        return Authorization(
            allowed=allowed,
            actor=actor,
            activity_id=activity_id,
            mode=mode,
            assignment=assignment,
            accountable=self.accountable_for(activity_id),
            consulted=self.roles_with(activity_id, "C"),
            informed=self.roles_with(activity_id, "I"),
        )

    def require(self, actor: str, activity_id: str, involvement: frozenset[str] = frozenset({"R", "A"})) -> Authorization:
        """Authorize or raise; ``involvement`` widens the acting set where a
        flow legitimately runs under a consulted role (e.g. a customer inside
        the loan-decision activity)."""
        auth = self.authorize(actor, activity_id)
        if not (auth.assignment & involvement):
            raise PolicyDenied(actor, activity_id, auth.accountable)
        return auth

    def to_dict(self) -> dict[str, Any]:
        return {
            "roles": self.roles,
            "activities": [
                {
                    "id": a.activity_id,
                    "description": a.description,
                    "assignments": {r: "".join(sorted(d)) for r, d in a.assignments.items()},
                }
                for a in self.ordered
            ],
        }


class PolicyService:
    """Holds the active matrix snapshot; reloads swap it atomically."""

    def __init__(self, matrix: RaciMatrix) -> None:
        self._lock = threading.Lock()
        self._matrix = matrix

    @property
    def matrix(self) -> RaciMatrix:
        with self._lock:
            return self._matrix

    def reload(self, source: str | Path | dict[str, Any]) -> RaciMatrix:
        fresh = RaciMatrix.load(source)
        with self._lock:
            self._matrix = fresh
        return fresh

    def authorize(self, actor: str, activity_id: str, mode: str = "perform") -> Authorization:
        return self.matrix.authorize(actor, activity_id, mode)

    def require(self, actor: str, activity_id: str, involvement: frozenset[str] = frozenset({"R", "A"})) -> Authorization:
        return self.matrix.require(actor, activity_id, involvement)

    def accountable_for(self, activity_id: str) -> str | None:
        return self.matrix.accountable_for(activity_id)


def bundled_matrix_path() -> Path:
    return Path(__file__).parent / "data" / "raci_matrix.json"
