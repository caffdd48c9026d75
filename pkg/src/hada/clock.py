"""Runtime clock: wall time for interactive use, logical ticks for replays."""

from __future__ import annotations

import threading
from datetime import datetime, timedelta, timezone

SIMULATED_EPOCH = datetime(2025, 1, 6, 9, 0, 0, tzinfo=timezone.utc)
TICK = timedelta(seconds=1)


class Clock:
    """Timestamp source shared by all runtime components.

    In ``simulated`` mode every call to :meth:`now` advances a logical clock
    by one tick, so a replayed run produces identical timestamps.
    """

    def __init__(self, mode: str = "wall", start: datetime | None = None) -> None:
        if mode not in ("wall", "simulated"):
            raise ValueError(f"unknown clock mode: {mode}")
        self.mode = mode
        self._lock = threading.Lock()
        self._current = start if start is not None else SIMULATED_EPOCH

    def now(self) -> datetime:
        if self.mode == "wall":
            return datetime.now(timezone.utc)
        with self._lock:
            self._current = self._current + TICK
            return self._current

    def now_iso(self) -> str:
        return self.now().isoformat()

    def advance_to(self, timestamp: datetime | str) -> None:
        """Fast-forward a simulated clock, e.g. when resuming from a ledger."""
        if self.mode != "simulated":
            return
        if isinstance(timestamp, str):
            timestamp = datetime.fromisoformat(timestamp)
        with self._lock:
            if timestamp > self._current:
                self._current = timestamp
