"""Task store: lifecycle enforcement, event streams, subscriptions.

One store serves every agent endpoint in the runtime. All mutations happen
under a single lock; per-task event order is therefore total, and every
event carries a gapless sequence number starting at 1.
"""

from __future__ import annotations

import copy
import threading
from typing import Any, Callable, Iterator

from ..errors import HadaError, IllegalTransition, NotFound
from .model import (
    TERMINAL_STATES,
    TRANSITIONS,
    Artifact,
    Message,
    Part,
    Task,
    TaskEvent,
    TaskState,
    Trigger,
)


class TaskStore:
    def __init__(self, clock: Any, ids: Any, known_agent: Callable[[str], bool] | None = None) -> None:
        self._clock = clock
        self._ids = ids
        self._known_agent = known_agent or (lambda agent_id: True)
        self._lock = threading.RLock()
        self._tasks: dict[str, Task] = {}
        self._events: dict[str, list[TaskEvent]] = {}
        self._conditions: dict[str, threading.Condition] = {}
        self._push_hooks: list[Callable[[Task, TaskEvent], None]] = []

    # -- helpers -----------------------------------------------------------

    def _require(self, task_id: str) -> Task:
        task = self._tasks.get(task_id)
        if task is None:
            raise NotFound("unknown-task", task_id)
        return task

    def _emit(self, task: Task, kind: str, payload: dict[str, Any]) -> TaskEvent:
        events = self._events[task.task_id]
        event = TaskEvent(
            kind=kind,
            task_id=task.task_id,
            payload=payload,
            sequence_no=len(events) + 1,
            timestamp=self._clock.now_iso(),
        )
        events.append(event)
        task.updated_at = event.timestamp
        condition = self._conditions[task.task_id]
        with condition:
            condition.notify_all()
        for hook in self._push_hooks:
            hook(task, event)
        return event

    def add_push_hook(self, hook: Callable[[Task, TaskEvent], None]) -> None:
        self._push_hooks.append(hook)

    # -- operations --------------------------------------------------------

    def send_task(self, client: str, server: str, message: Message) -> Task:
        if message.role != "user":
            raise HadaError("invalid-message", "initial message must carry role 'user'")
        with self._lock:
            if not self._known_agent(server):
                raise NotFound("unknown-server-agent", server)
            if not self._known_agent(client):
                raise HadaError("unauthenticated-client", f"unknown client agent '{client}'")
            now = self._clock.now_iso()
            message.timestamp = message.timestamp or now
            task = Task(
                task_id=self._ids.next("T"),
                state=TaskState.SUBMITTED,
                client_agent=client,
                server_agent=server,
                messages=[message],
                created_at=now,
                updated_at=now,
            )
            self._tasks[task.task_id] = task
            self._events[task.task_id] = []
            self._conditions[task.task_id] = threading.Condition()
            self._emit(task, "status-update", {"state": task.state.value})
            return self.get(task.task_id)

    def add_message(self, task_id: str, message: Message) -> Task:
        """Append the next conversation turn, enforcing user/agent alternation."""
        with self._lock:
            task = self._require(task_id)
            if task.state in TERMINAL_STATES:
                raise HadaError("task-terminal", f"task {task_id} is {task.state.value}")
            expected = "user" if task.messages[-1].role == "agent" else "agent"
            if message.role != expected:
                raise HadaError(
                    "invalid-message",
                    f"expected a '{expected}' message next on task {task_id}",
                )
            message.timestamp = message.timestamp or self._clock.now_iso()
            task.messages.append(message)
            task.updated_at = message.timestamp
            return self.get(task_id)

    def transition(self, task_id: str, trigger: Trigger | str) -> Task:
        trigger = Trigger(trigger)
        with self._lock:
            task = self._require(task_id)
            target = TRANSITIONS.get((task.state, trigger))
            if target is None:
                raise IllegalTransition("illegal-transition", f"task {task_id}", task.state.value, trigger.value)
            task.state = target
            self._emit(task, "status-update", {"state": target.value})
            return self.get(task_id)

    def cancel(self, task_id: str) -> Task:
        with self._lock:
            task = self._require(task_id)
            if task.state in TERMINAL_STATES:
                raise IllegalTransition(
                    "illegal-transition", f"task {task_id}", task.state.value, Trigger.CANCEL.value
                )
            return self.transition(task_id, Trigger.CANCEL)

    def add_artifact(self, task_id: str, parts: list[Part]) -> Artifact:
        if not parts:
            raise HadaError("invalid-message", "artifact has no parts")
        with self._lock:
            task = self._require(task_id)
            artifact = Artifact(
                artifact_id=self._ids.next("ART"), parts=parts, produced_by=task_id
            )
            task.artifacts.append(artifact)
            self._emit(task, "artifact-update", {"artifact": artifact.to_dict()})
            return artifact

    def update_metadata(self, task_id: str, updates: dict[str, Any]) -> Task:
        """Merge dialog-state bookkeeping into the task's metadata."""
        with self._lock:
            task = self._require(task_id)
            task.metadata.update(updates)
            return self.get(task_id)

    def set_push_notification(self, task_id: str, webhook: str) -> dict[str, Any]:
        with self._lock:
            task = self._require(task_id)
            if task.state in TERMINAL_STATES:
                raise HadaError("task-terminal", f"task {task_id} is {task.state.value}")
            task.push_config = webhook
            return {"task_id": task_id, "webhook": webhook, "acknowledged": True}

    # -- reads -------------------------------------------------------------

    def get(self, task_id: str) -> Task:
        with self._lock:
            return copy.deepcopy(self._require(task_id))

    def __contains__(self, task_id: str) -> bool:
        with self._lock:
            return task_id in self._tasks

    def events(self, task_id: str) -> list[TaskEvent]:
        with self._lock:
            self._require(task_id)
            return list(self._events[task_id])

    def list_tasks(self, server_agent: str | None = None, client_agent: str | None = None) -> list[Task]:
        with self._lock:
            out = []
            for task in self._tasks.values():
                if server_agent and task.server_agent != server_agent:
                    continue
                if client_agent and task.client_agent != client_agent:
                    continue
                out.append(copy.deepcopy(task))
            return out

    def subscribe(self, task_id: str, from_sequence: int = 0, timeout: float | None = None) -> Iterator[TaskEvent]:
        """Replay past events, then follow live ones until a terminal state.

        ``from_sequence`` resumes after a given sequence number (SSE
        last-event-id semantics).
        """
        with self._lock:
            self._require(task_id)
            condition = self._conditions[task_id]
        cursor = from_sequence
        while True:
            with self._lock:
                events = self._events[task_id]
                pending = events[cursor:]
                task_state = self._tasks[task_id].state
            for event in pending:
                cursor = event.sequence_no
                yield event
            if pending:
                continue
            if task_state in TERMINAL_STATES:
                return
            with condition:
                if len(self._events[task_id]) > cursor:
                    continue
                if not condition.wait(timeout=timeout):
                    return
