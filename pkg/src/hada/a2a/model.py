"""Wire model for agent-to-agent work: cards, tasks, messages, parts, events.

The task lifecycle is a fixed six-state machine; the edge set lives in
``TRANSITIONS`` and everything else (validation, replay, property tests)
derives from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from ..canonical import canonical_bytes
from ..errors import HadaError


class TaskState(str, Enum):
    SUBMITTED = "submitted"
    WORKING = "working"
    INPUT_REQUIRED = "input-required"
    COMPLETED = "completed"
    FAILED = "failed"
    CANCELED = "canceled"


class Trigger(str, Enum):
    START = "start"
    REQUIRE_INPUT = "require-input"
    RESUME = "resume"
    COMPLETE = "complete"
    FAIL = "fail"
    CANCEL = "cancel"


TRANSITIONS: dict[tuple[TaskState, Trigger], TaskState] = {
    (TaskState.SUBMITTED, Trigger.START): TaskState.WORKING,
    (TaskState.SUBMITTED, Trigger.CANCEL): TaskState.CANCELED,
    (TaskState.WORKING, Trigger.REQUIRE_INPUT): TaskState.INPUT_REQUIRED,
    (TaskState.WORKING, Trigger.COMPLETE): TaskState.COMPLETED,
    (TaskState.WORKING, Trigger.FAIL): TaskState.FAILED,
    (TaskState.WORKING, Trigger.CANCEL): TaskState.CANCELED,
    (TaskState.INPUT_REQUIRED, Trigger.RESUME): TaskState.WORKING,
    (TaskState.INPUT_REQUIRED, Trigger.CANCEL): TaskState.CANCELED,
}

TERMINAL_STATES = frozenset({TaskState.COMPLETED, TaskState.FAILED, TaskState.CANCELED})


@dataclass
class Part:
    """One content unit: exactly one of text, file reference, or data."""

    kind: str
    text: str | None = None
    file: dict[str, Any] | None = None  # {"uri": ...} or {"bytes_b64": ..., "name": ...}
    data: dict[str, Any] | None = None

    def __post_init__(self) -> None:
        payloads = {"text": self.text, "file": self.file, "data": self.data}
        if self.kind not in payloads:
            raise HadaError("invalid-message", f"unknown part kind '{self.kind}'")
        populated = [k for k, v in payloads.items() if v is not None]
        if populated != [self.kind]:
            raise HadaError(
                "invalid-message",
                f"part of kind '{self.kind}' must populate exactly its own payload",
            )

    @classmethod
    def text_part(cls, text: str) -> "Part":
        return cls(kind="text", text=text)

    @classmethod
    def data_part(cls, data: dict[str, Any]) -> "Part":
        return cls(kind="data", data=data)

    @classmethod
    def file_part(cls, *, uri: str | None = None, bytes_b64: str | None = None, name: str | None = None) -> "Part":
        ref: dict[str, Any] = {}
        if uri is not None:
            ref["uri"] = uri
        if bytes_b64 is not None:
            ref["bytes_b64"] = bytes_b64
        if name is not None:
            ref["name"] = name
        return cls(kind="file", file=ref)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.text is not None:
            out["text"] = self.text
        if self.file is not None:
            out["file"] = self.file
        if self.data is not None:
            out["data"] = self.data
        return out

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Part":
        return cls(
            kind=raw.get("kind", ""),
            text=raw.get("text"),
            file=raw.get("file"),
            data=raw.get("data"),
        )


@dataclass
class Message:
    role: str  # "user" or "agent"
    parts: list[Part]
    timestamp: str = ""

    def __post_init__(self) -> None:
        if self.role not in ("user", "agent"):
            raise HadaError("invalid-message", f"unknown message role '{self.role}'")
        if not self.parts:
            raise HadaError("invalid-message", "message has no parts")

    @classmethod
    def user_text(cls, text: str) -> "Message":
        return cls(role="user", parts=[Part.text_part(text)])

    @classmethod
    def agent_text(cls, text: str) -> "Message":
        return cls(role="agent", parts=[Part.text_part(text)])

    def text(self) -> str:
        return "\n".join(p.text for p in self.parts if p.kind == "text" and p.text)

    def to_dict(self) -> dict[str, Any]:
        return {
            "role": self.role,
            "parts": [p.to_dict() for p in self.parts],
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Message":
        return cls(
            role=raw.get("role", ""),
            parts=[Part.from_dict(p) for p in raw.get("parts", [])],
            timestamp=raw.get("timestamp", ""),
        )


@dataclass
class Artifact:
    artifact_id: str
    parts: list[Part]
    produced_by: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "artifact_id": self.artifact_id,
            "parts": [p.to_dict() for p in self.parts],
            "produced_by": self.produced_by,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Artifact":
        return cls(
            artifact_id=raw["artifact_id"],
            parts=[Part.from_dict(p) for p in raw.get("parts", [])],
            produced_by=raw.get("produced_by", ""),
        )


@dataclass
class TaskEvent:
    kind: str  # "status-update" | "artifact-update"
    task_id: str
    payload: dict[str, Any]
    sequence_no: int
    timestamp: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "task_id": self.task_id,
            "payload": self.payload,
            "sequence_no": self.sequence_no,
            "timestamp": self.timestamp,
        }


@dataclass
class Task:
    task_id: str
    state: TaskState
    client_agent: str
    server_agent: str
    messages: list[Message] = field(default_factory=list)
    artifacts: list[Artifact] = field(default_factory=list)
    created_at: str = ""
    updated_at: str = ""
    push_config: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "state": self.state.value,
            "client_agent": self.client_agent,
            "server_agent": self.server_agent,
            "messages": [m.to_dict() for m in self.messages],
            "artifacts": [a.to_dict() for a in self.artifacts],
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "push_config": self.push_config,
            "metadata": self.metadata,
        }


@dataclass
class AgentCard:
    agent_id: str
    name: str
    capabilities: list[str]
    endpoint: str
    auth_modes: list[str]
    version: str
    signature: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent_id": self.agent_id,
            "name": self.name,
            "capabilities": list(self.capabilities),
            "endpoint": self.endpoint,
            "auth_modes": list(self.auth_modes),
            "version": self.version,
            "signature": self.signature,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "AgentCard":
        return cls(
            agent_id=raw.get("agent_id", ""),
            name=raw.get("name", ""),
            capabilities=list(raw.get("capabilities", [])),
            endpoint=raw.get("endpoint", ""),
            auth_modes=list(raw.get("auth_modes", [])),
            version=raw.get("version", ""),
            signature=raw.get("signature", ""),
        )


def card_signing_bytes(card: AgentCard) -> bytes:
    """Canonical bytes covered by the card signature (everything but it)."""
    body = card.to_dict()
    body.pop("signature", None)
    return canonical_bytes(body)


def rebuild_task(base: Task, events: list[TaskEvent]) -> Task:
    """Replay a task's event stream over its initial snapshot.

    Used to check that stored state and the event log never diverge.
    """
    state = TaskState.SUBMITTED
    artifacts: list[Artifact] = []
    for event in events:
        if event.kind == "status-update":
            state = TaskState(event.payload["state"])
        elif event.kind == "artifact-update":
            artifacts.append(Artifact.from_dict(event.payload["artifact"]))
    return Task(
        task_id=base.task_id,
        state=state,
        client_agent=base.client_agent,
        server_agent=base.server_agent,
        messages=base.messages,
        artifacts=artifacts,
        created_at=base.created_at,
        updated_at=events[-1].timestamp if events else base.created_at,
        push_config=base.push_config,
        metadata=base.metadata,
    )
