"""Append-only, hash-chained event ledger.

Every governance event (objectives, KPI bindings, model versions, tickets,
watchlist changes, tool invocations, ethics flags) and every credit decision
is appended here. Each entry hashes its predecessor, so any in-place edit is
detectable; truncation of the tail is caught by a head checkpoint kept in a
separate file.

Storage is one canonical-JSON record per line. Entry 0 links to the genesis
constant (64 zero hex digits).
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator

from .canonical import canonical_bytes, sha256_hex
from .errors import HadaError, NotFound

GENESIS_HASH = "0" * 64

KINDS = (
    "decision",
    "objective",
    "kpi-binding",
    "version",
    "ticket",
    "watchlist",
    "invocation",
    "ethics-flag",
)


@dataclass
class LedgerEntry:
    index: int
    timestamp: str
    kind: str
    payload: dict[str, Any]
    prev_hash: str
    entry_hash: str

    @staticmethod
    def compute_hash(index: int, timestamp: str, kind: str, payload: dict[str, Any], prev_hash: str) -> str:
        body = {
            "index": index,
            "timestamp": timestamp,
            "kind": kind,
            "payload": payload,
            "prev_hash": prev_hash,
        }
        return sha256_hex(canonical_bytes(body))

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "timestamp": self.timestamp,
            "kind": self.kind,
            "payload": self.payload,
            "prev_hash": self.prev_hash,
            "entry_hash": self.entry_hash,
        }


@dataclass
class DecisionRecord:
    """Lineage record for one scored application."""

    decision_id: str
    tool_id: str
    model_version: str
    feature_vector: dict[str, Any]
    decision_path: list[dict[str, Any]]
    applied_policy: dict[str, Any]
    outcome: str
    customer_task_id: str
    explanation_text: str
    record_type: str = "production"  # or "audit-replay"

    def to_dict(self) -> dict[str, Any]:
        return {
            "decision_id": self.decision_id,
            "tool_id": self.tool_id,
            "model_version": self.model_version,
            "feature_vector": self.feature_vector,
            "decision_path": self.decision_path,
            "applied_policy": self.applied_policy,
            "outcome": self.outcome,
            "customer_task_id": self.customer_task_id,
            "explanation_text": self.explanation_text,
            "record_type": self.record_type,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DecisionRecord":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


@dataclass
class VerifyResult:
    valid: bool
    bad_index: int | None = None
    reason: str = ""

    def to_dict(self) -> dict[str, Any]:
        if self.valid:
            return {"valid": True}
        return {"valid": False, "index": self.bad_index, "reason": self.reason}


class Ledger:
    """Single-writer, multi-reader chained log.

    ``path=None`` keeps everything in memory (tests); otherwise entries are
    appended to ``<path>`` and the checkpoint lives in ``<path>.head``.
    """

    def __init__(self, path: str | Path | None = None, clock: Any = None) -> None:
        self._lock = threading.RLock()
        self._entries: list[LedgerEntry] = []
        self._decisions: dict[str, int] = {}
        self._clock = clock
        self.path = Path(path) if path is not None else None
        self._observers: list[Callable[[LedgerEntry], None]] = []
        # Optional hook: extra runtime state (id counters etc.) folded into
        # the head checkpoint on every append, so a restart resumes exactly.
        self.runtime_state_provider: Callable[[], dict[str, Any]] | None = None
        if self.path is not None and self.path.exists():
            self._load()

    # -- construction ------------------------------------------------------

    def _load(self) -> None:
        assert self.path is not None
        with self.path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    raw = json.loads(line)
                    entry = LedgerEntry(**raw)
                except (json.JSONDecodeError, TypeError) as exc:
                    raise HadaError(
                        "corrupt-ledger", f"unreadable ledger line {lineno}", index=lineno
                    ) from exc
                self._entries.append(entry)
                self._index_entry(entry)
        check = self.verify_chain()
        if not check.valid:
            raise HadaError(
                "corrupt-ledger",
                f"hash chain broken at index {check.bad_index}: {check.reason}",
                index=check.bad_index,
            )

    def _index_entry(self, entry: LedgerEntry) -> None:
        if entry.kind == "decision" and entry.payload.get("record_type") == "production":
            self._decisions.setdefault(entry.payload["decision_id"], entry.index)

    # -- writes ------------------------------------------------------------

    def on_append(self, callback: Callable[[LedgerEntry], None]) -> None:
        self._observers.append(callback)

    def append(self, kind: str, payload: dict[str, Any], timestamp: str | None = None) -> LedgerEntry:
        if kind not in KINDS:
            raise HadaError("storage-failure", f"unknown ledger kind '{kind}'")
        try:
            payload = json.loads(canonical_bytes(payload))
        except (TypeError, ValueError) as exc:
            raise HadaError("storage-failure", f"payload not canonicalizable: {exc}") from exc
        with self._lock:
            index = len(self._entries)
            prev = self._entries[-1].entry_hash if self._entries else GENESIS_HASH
            ts = timestamp or (self._clock.now_iso() if self._clock else "")
            entry = LedgerEntry(
                index=index,
                timestamp=ts,
                kind=kind,
                payload=payload,
                prev_hash=prev,
                entry_hash=LedgerEntry.compute_hash(index, ts, kind, payload, prev),
            )
            if self.path is not None:
                try:
                    with self.path.open("a", encoding="utf-8") as fh:
                        fh.write(canonical_bytes(entry.to_dict()).decode("utf-8") + "\n")
                        fh.flush()
                        os.fsync(fh.fileno())
                except OSError as exc:
                    raise HadaError("storage-failure", str(exc)) from exc
            self._entries.append(entry)
            self._index_entry(entry)
            self._write_checkpoint()
        for callback in self._observers:
            callback(entry)
        return entry

    # -- checkpoint --------------------------------------------------------

    @property
    def checkpoint_path(self) -> Path | None:
        return self.path.with_suffix(self.path.suffix + ".head") if self.path else None

    def _write_checkpoint(self) -> None:
        if self.checkpoint_path is None:
            return
        state: dict[str, Any] = {
            "entry_count": len(self._entries),
            "entry_hash": self.head_hash(),
        }
        if self.runtime_state_provider is not None:
            state["runtime"] = self.runtime_state_provider()
        elif self.checkpoint_path.exists():
            try:
                old = json.loads(self.checkpoint_path.read_text())
                if "runtime" in old:
                    state["runtime"] = old["runtime"]
            except (OSError, json.JSONDecodeError):
                pass
        self.checkpoint_path.write_text(json.dumps(state, indent=2) + "\n")

    def load_runtime_state(self) -> dict[str, Any]:
        if self.checkpoint_path is None or not self.checkpoint_path.exists():
            return {}
        try:
            return json.loads(self.checkpoint_path.read_text()).get("runtime", {})
        except (OSError, json.JSONDecodeError):
            return {}

    # -- reads -------------------------------------------------------------

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def head_hash(self) -> str:
        with self._lock:
            return self._entries[-1].entry_hash if self._entries else GENESIS_HASH

    def get(self, index: int) -> LedgerEntry:
        with self._lock:
            if index < 0 or index >= len(self._entries):
                raise NotFound("unknown-decision", f"ledger index {index}")
            return self._entries[index]

    def entries(self, start: int = 0, stop: int | None = None) -> list[LedgerEntry]:
        with self._lock:
            return list(self._entries[start:stop])

    def iter_kind(self, kind: str) -> Iterator[LedgerEntry]:
        for entry in self.entries():
            if entry.kind == kind:
                yield entry

    def kind_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for entry in self.entries():
            counts[entry.kind] = counts.get(entry.kind, 0) + 1
        return counts

    # -- verification ------------------------------------------------------

    def _stored_records(self) -> Iterator[tuple[int, dict[str, Any] | None, str]]:
        """Yield (index, parsed record or None, reason) from the backing store.

        Reads raw bytes: a tampered line may not even be valid UTF-8, which
        must surface as corruption at that index, not as a crash.
        """
        if self.path is not None and self.path.exists():
            raw = self.path.read_bytes()
            lineno = 0
            for line in raw.split(b"\n"):
                if not line.strip():
                    continue
                try:
                    yield lineno, json.loads(line.decode("utf-8")), ""
                except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                    yield lineno, None, f"unreadable: {exc}"
                lineno += 1
        else:
            for entry in self.entries():
                yield entry.index, entry.to_dict(), ""

    def verify_chain(self) -> VerifyResult:
        """Recompute every hash and link over the backing store."""
        prev = GENESIS_HASH
        expected_index = 0
        for index, record, reason in self._stored_records():
            if record is None:
                return VerifyResult(False, index, reason)
            required = {"index", "timestamp", "kind", "payload", "prev_hash", "entry_hash"}
            if not required.issubset(record):
                return VerifyResult(False, index, "missing fields")
            if record["index"] != expected_index:
                return VerifyResult(False, index, "index out of sequence")
            if record["prev_hash"] != prev:
                return VerifyResult(False, index, "broken link to predecessor")
            recomputed = LedgerEntry.compute_hash(
                record["index"], record["timestamp"], record["kind"], record["payload"], record["prev_hash"]
            )
            if recomputed != record["entry_hash"]:
                return VerifyResult(False, index, "entry hash mismatch")
            prev = record["entry_hash"]
            expected_index += 1
        return VerifyResult(True)

    def verify_head(self) -> VerifyResult:
        """Check the persisted head checkpoint against the stored tail."""
        if self.checkpoint_path is None or not self.checkpoint_path.exists():
            return VerifyResult(True)
        state = json.loads(self.checkpoint_path.read_text())
        records = list(self._stored_records())
        count = len(records)
        tail_hash = records[-1][1]["entry_hash"] if records and records[-1][1] else GENESIS_HASH
        if count != state.get("entry_count") or tail_hash != state.get("entry_hash"):
            return VerifyResult(False, count, "store does not match head checkpoint")
        return VerifyResult(True)

    # -- decisions ---------------------------------------------------------

    def record_decision(self, record: DecisionRecord, timestamp: str | None = None) -> LedgerEntry:
        return self.append("decision", record.to_dict(), timestamp)

    def query_decision(self, decision_id: str) -> tuple[DecisionRecord, list[int]]:
        with self._lock:
            index = self._decisions.get(decision_id)
        if index is None:
            raise NotFound("unknown-decision", decision_id)
        entry = self.get(index)
        record = DecisionRecord.from_dict(entry.payload)
        proof = [index]
        for other in self.iter_kind("invocation"):
            if other.payload.get("result", {}).get("decision_id") == decision_id:
                proof.append(other.index)
        return record, sorted(proof)

    def list_decisions(self) -> list[str]:
        with self._lock:
            return sorted(self._decisions, key=self._decisions.get)  # type: ignore[arg-type]

    # -- export ------------------------------------------------------------

    def export_json(self, decision_id: str | None = None) -> dict[str, Any]:
        if decision_id is not None:
            record, proof = self.query_decision(decision_id)
            return {
                "decision": record.to_dict(),
                "inclusion_proof": proof,
                "entries": [self.get(i).to_dict() for i in proof],
                "chain": self.verify_chain().to_dict(),
            }
        return {
            "entries": [e.to_dict() for e in self.entries()],
            "head": self.head_hash(),
            "chain": self.verify_chain().to_dict(),
        }

    def export_text(self, decision_id: str | None = None) -> str:
        lines: list[str] = []
        if decision_id is not None:
            record, proof = self.query_decision(decision_id)
            lines.append(f"Audit report for decision {record.decision_id}")
            lines.append(f"  tool: {record.tool_id}  model version: {record.model_version}")
            lines.append(f"  outcome: {record.outcome}")
            lines.append(f"  originating task: {record.customer_task_id}")
            lines.append("  decision path:")
            for step in record.decision_path:
                lines.append(
                    f"    - {step['feature']} {step['comparator']} {step['threshold']}"
                    f" -> {step['branch']}"
                )
            lines.append(f"  features: {json.dumps(record.feature_vector, sort_keys=True)}")
            policy = record.applied_policy
            lines.append(
                f"  policy: activity={policy.get('activity')} acting={json.dumps(policy.get('roles'), sort_keys=True)}"
            )
            lines.append(f"  explanation: {record.explanation_text}")
            lines.append(f"  ledger inclusion indices: {proof}")
        else:
            lines.append(f"Ledger export ({len(self)} entries, head {self.head_hash()[:16]}…)")
            for entry in self.entries():
                lines.append(
                    f"  [{entry.index:5d}] {entry.timestamp} {entry.kind:12s} {entry.entry_hash[:12]}…"
                )
        lines.append(f"chain: {'valid' if self.verify_chain().valid else 'INVALID'}")
        return "\n".join(lines) + "\n"


def verify_stored_chain(path: str | Path) -> VerifyResult:
    """Verify a ledger file without materializing it (used before startup)."""
    probe = Ledger.__new__(Ledger)
    probe.path = Path(path)
    probe._entries = []
    probe._lock = threading.RLock()
    return probe.verify_chain()
