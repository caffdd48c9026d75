"""Agent-to-agent conversation layer: cards, tasks, events, push delivery."""

from .model import (
    AgentCard,
    Artifact,
    Message,
    Part,
    Task,
    TaskEvent,
    TaskState,
    Trigger,
    TRANSITIONS,
    TERMINAL_STATES,
    card_signing_bytes,
    rebuild_task,
)
from .push import PushDispatcher, WebhookInbox
from .registry import AgentRegistry
from .store import TaskStore

__all__ = [
    "AgentCard",
    "AgentRegistry",
    "Artifact",
    "Message",
    "Part",
    "PushDispatcher",
    "Task",
    "TaskEvent",
    "TaskState",
    "TaskStore",
    "Trigger",
    "TRANSITIONS",
    "TERMINAL_STATES",
    "WebhookInbox",
    "card_signing_bytes",
    "rebuild_task",
]
