"""Deterministic identifier streams.

Ticket serials are plain seeded counters (the seed is the first serial
issued). Decision references form a seeded chain: the configured seed is the
first reference issued and each successor is drawn from a PRNG keyed on its
predecessor, so replays from the same seed reproduce the same references.
"""

from __future__ import annotations

import random
import string
import threading
from typing import Any

DECISION_HEAD = string.digits + string.ascii_uppercase
DECISION_TAIL = string.ascii_uppercase


class SerialCounter:
    def __init__(self, prefix: str, seed: int) -> None:
        self.prefix = prefix
        self._next = seed

    def issue(self) -> str:
        serial = self._next
        self._next += 1
        return f"{self.prefix}-{serial}"

    def observe(self, ident: str) -> None:
        """Bump past an already-issued id (used when replaying a ledger)."""
        prefix, _, serial = ident.rpartition("-")
        if prefix == self.prefix and serial.isdigit():
            self._next = max(self._next, int(serial) + 1)


class DecisionIdChain:
    def __init__(self, seed: str) -> None:
        self._pending = seed
        self._last: str | None = None

    @staticmethod
    def _successor(previous: str) -> str:
        rng = random.Random(f"decision-ref:{previous}")
        head = "".join(rng.choices(DECISION_HEAD, k=5))
        tail = "".join(rng.choices(DECISION_TAIL, k=3))
        return head + tail

    def issue(self) -> str:
        ident = self._pending
        self._last = ident
        self._pending = self._successor(ident)
        return ident

    def observe(self, ident: str) -> None:
        self._last = ident
        self._pending = self._successor(ident)


class IdFactory:
    """All id streams for one runtime, with snapshot/restore for restarts."""

    TICKET_SEEDS = {"DS": 10452, "OPS": 3417, "ETH": 512}

    def __init__(self, decision_seed: str = "90210ABC") -> None:
        self._lock = threading.Lock()
        self.tickets = {p: SerialCounter(p, s) for p, s in self.TICKET_SEEDS.items()}
        self.decisions = DecisionIdChain(decision_seed)
        self._counters: dict[str, int] = {}

    def next_ticket(self, prefix: str) -> str:
        with self._lock:
            return self.tickets[prefix].issue()

    def next_decision(self) -> str:
        with self._lock:
            return self.decisions.issue()

    def next(self, kind: str) -> str:
        """Sequential ids for tasks, objectives, bindings, triggers, etc."""
        with self._lock:
            n = self._counters.get(kind, 0) + 1
            self._counters[kind] = n
            return f"{kind}-{n:06d}" if kind == "T" else f"{kind}-{n}"

    def observe(self, ident: str) -> None:
        """Bump any counter past an id seen during ledger replay."""
        prefix, _, serial = ident.rpartition("-")
        if not serial.isdigit():
            return
        with self._lock:
            if prefix in self.tickets:
                self.tickets[prefix].observe(ident)
            elif prefix:
                current = self._counters.get(prefix, 0)
                self._counters[prefix] = max(current, int(serial))

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            return {
                "tickets": {p: c._next for p, c in self.tickets.items()},
                "decision_pending": self.decisions._pending,
                "counters": dict(self._counters),
            }

    def restore(self, state: dict[str, Any]) -> None:
        with self._lock:
            for prefix, nxt in state.get("tickets", {}).items():
                if prefix in self.tickets:
                    self.tickets[prefix]._next = int(nxt)
            pending = state.get("decision_pending")
            if pending:
                self.decisions._pending = pending
            self._counters.update(state.get("counters", {}))
