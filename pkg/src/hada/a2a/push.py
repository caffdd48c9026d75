"""Webhook push delivery: at-least-once with exponential backoff.

Delivery may repeat (retries after a lost acknowledgment), so receivers
deduplicate on (task_id, sequence_no); ``WebhookInbox`` is the reference
receiver used by tests and the demo console.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from typing import Any, Callable

from .model import Task, TaskEvent

log = logging.getLogger(__name__)

BACKOFF_BASE = 0.1
BACKOFF_FACTOR = 2.0
MAX_ATTEMPTS = 5

Transport = Callable[[str, dict[str, Any]], None]  # raises on failure


def http_transport(url: str, payload: dict[str, Any]) -> None:
    import httpx

    response = httpx.post(url, json=payload, timeout=5.0)
    response.raise_for_status()


class PushDispatcher:
    """Queues task events and POSTs them to each task's configured webhook."""

    def __init__(
        self,
        transport: Transport | None = None,
        sleeper: Callable[[float], None] | None = None,
        synchronous: bool = False,
    ) -> None:
        self._transport = transport or http_transport
        self._sleep = sleeper or time.sleep
        self._synchronous = synchronous
        self._queue: "queue.Queue[tuple[str, dict[str, Any]] | None]" = queue.Queue()
        self._worker: threading.Thread | None = None
        if not synchronous:
            self._worker = threading.Thread(target=self._run, name="push-dispatcher", daemon=True)
            self._worker.start()

    def hook(self, task: Task, event: TaskEvent) -> None:
        """TaskStore push hook: enqueue events for tasks with a webhook."""
        if task.push_config:
            self.submit(task.push_config, event.to_dict())

    def submit(self, url: str, payload: dict[str, Any]) -> None:
        if self._synchronous:
            self._deliver(url, payload)
        else:
            self._queue.put((url, payload))

    def _deliver(self, url: str, payload: dict[str, Any]) -> bool:
        delay = BACKOFF_BASE
        for attempt in range(1, MAX_ATTEMPTS + 1):
            try:
                self._transport(url, payload)
                return True
            except Exception as exc:  # noqa: BLE001 - any transport failure retries
                log.warning("push to %s failed (attempt %d/%d): %s", url, attempt, MAX_ATTEMPTS, exc)
                if attempt < MAX_ATTEMPTS:
                    self._sleep(delay)
                    delay *= BACKOFF_FACTOR
        return False

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            self._deliver(*item)
            self._queue.task_done()

    def drain(self) -> None:
        self._queue.join()

    def close(self) -> None:
        if self._worker is not None:
            self._queue.put(None)
            self._worker.join(timeout=5)


class WebhookInbox:
    """Receiver-side helper that deduplicates by (task_id, sequence_no)."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.deliveries: list[dict[str, Any]] = []
        self._seen: set[tuple[str, int]] = set()

    def receive(self, payload: dict[str, Any]) -> bool:
        key = (payload.get("task_id", ""), payload.get("sequence_no", -1))
        with self._lock:
            if key in self._seen:
                return False
            self._seen.add(key)
            self.deliveries.append(payload)
            return True
