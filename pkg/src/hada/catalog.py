"""Governance catalogues: business targets, model versions, watchlist, tickets.

All mutations are commands validated against the duty matrix, appended to the
ledger as events, then applied to in-memory state; startup replays the ledger
through the same apply functions, so a restarted runtime reconstructs the
exact catalogue state. A single writer lock serializes every mutation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import HadaError, NotFound
from .ledger import Ledger
from .policy import PolicyService

WEIGHT_EPS = 1e-9

TICKET_PREFIX = {"model-development": "DS", "deployment": "OPS", "ethics": "ETH"}

TICKET_EDGES: dict[str, frozenset[str]] = {
    "open": frozenset({"in-progress", "awaiting-approval"}),
    "in-progress": frozenset({"awaiting-approval", "done"}),
    "awaiting-approval": frozenset({"approved", "rejected"}),
    "approved": frozenset({"in-progress", "done"}),
    "done": frozenset(),
    "rejected": frozenset(),
}

VERSION_EDGES: dict[str, frozenset[str]] = {
    "draft": frozenset({"validated"}),
    "validated": frozenset({"awaiting-approval"}),
    "awaiting-approval": frozenset({"production", "deprecated"}),
    "production": frozenset({"deprecated"}),
    "deprecated": frozenset(),
}

# A role may notify/act through these callbacks; wired by the runtime.
Notifier = Callable[[str, str, str, dict[str, Any], list[str], list[str]], None]


@dataclass
class Objective:
    objective_id: str
    horizon: str  # yearly | quarterly
    statement: str
    key_results: list[dict[str, Any]]
    owner_role: str
    effective_from: str
    status: str = "active"
    superseded_by: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "objective_id": self.objective_id,
            "horizon": self.horizon,
            "statement": self.statement,
            "key_results": self.key_results,
            "owner_role": self.owner_role,
            "effective_from": self.effective_from,
            "status": self.status,
            "superseded_by": self.superseded_by,
        }


@dataclass
class KpiBinding:
    binding_id: str
    tool_id: str
    objective_id: str
    kpi: str
    weight: float
    set_by: str
    timestamp: str
    replaced_by: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "binding_id": self.binding_id,
            "tool_id": self.tool_id,
            "objective_id": self.objective_id,
            "kpi": self.kpi,
            "weight": self.weight,
            "set_by": self.set_by,
            "timestamp": self.timestamp,
            "replaced_by": self.replaced_by,
        }


@dataclass
class ModelVersion:
    tool_id: str
    version: str
    feature_list: list[str]
    tree: dict[str, Any]
    status: str
    validation_metrics: dict[str, float]
    created_by: str
    approval: dict[str, Any] | None = None

    def to_dict(self, with_tree: bool = True) -> dict[str, Any]:
        out = {
            "tool_id": self.tool_id,
            "version": self.version,
            "feature_list": self.feature_list,
            "status": self.status,
            "validation_metrics": self.validation_metrics,
            "created_by": self.created_by,
            "approval": self.approval,
        }
        if with_tree:
            out["tree"] = self.tree
        return out


@dataclass
class WatchlistEntry:
    attribute: str
    flagged_by: str
    reason: str
    timestamp: str
    source_ticket: str | None = None
    cleared: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "attribute": self.attribute,
            "flagged_by": self.flagged_by,
            "reason": self.reason,
            "timestamp": self.timestamp,
            "source_ticket": self.source_ticket,
            "cleared": self.cleared,
        }


@dataclass
class Ticket:
    ticket_id: str
    kind: str
    state: str
    subject: str
    body: str
    raised_by: str
    assigned_role: str
    links: list[str] = field(default_factory=list)
    history: list[dict[str, Any]] = field(default_factory=list)
    watchers: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ticket_id": self.ticket_id,
            "kind": self.kind,
            "state": self.state,
            "subject": self.subject,
            "body": self.body,
            "raised_by": self.raised_by,
            "assigned_role": self.assigned_role,
            "links": self.links,
            "history": self.history,
            "watchers": self.watchers,
        }


@dataclass
class EthicsTrigger:
    trigger_id: str
    cause: str  # customer-complaint | watchlist-hit | manual
    subject_attribute: str | None
    source: str
    resulting_ticket: str
    state: str = "raised"  # raised | under-review | resolved
    raised_by: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "trigger_id": self.trigger_id,
            "cause": self.cause,
            "subject_attribute": self.subject_attribute,
            "source": self.source,
            "resulting_ticket": self.resulting_ticket,
            "state": self.state,
            "raised_by": self.raised_by,
        }


class Catalog:
    def __init__(
        self,
        ledger: Ledger,
        ids: Any,
        clock: Any,
        policy: PolicyService,
        notifier: Notifier | None = None,
        tool_exists: Callable[[str], bool] | None = None,
    ) -> None:
        self._ledger = ledger
        self._ids = ids
        self._clock = clock
        self._policy = policy
        self._notifier = notifier
        self._tool_exists = tool_exists
        self._lock = threading.RLock()
        self._replaying = False

        self.objectives: dict[str, Objective] = {}
        self.bindings: dict[str, KpiBinding] = {}
        self.versions: dict[tuple[str, str], ModelVersion] = {}
        self.watchlist: list[WatchlistEntry] = []
        self.tickets: dict[str, Ticket] = {}
        self.triggers: dict[str, EthicsTrigger] = {}

        self._replay()

    # -- event plumbing ------------------------------------------------------

    def _replay(self) -> None:
        self._replaying = True
        try:
            for entry in self._ledger.entries():
                apply = getattr(self, f"_apply_{entry.kind.replace('-', '_')}", None)
                if apply is not None:
                    apply(entry.payload)
        finally:
            self._replaying = False

    def _record(self, kind: str, payload: dict[str, Any]) -> None:
        self._ledger.append(kind, payload)

    def _notify(self, activity: str, actor: str, summary: str, refs: dict[str, Any]) -> None:
        if self._replaying or self._notifier is None:
            return
        matrix = self._policy.matrix
        consulted = [r for r in matrix.roles_with(activity, "C") if r != actor]
        informed = [r for r in matrix.roles_with(activity, "I") if r != actor]
        self._notifier(activity, actor, summary, refs, consulted, informed)

    # -- objectives ------------------------------------------------------------

    def _apply_objective(self, payload: dict[str, Any]) -> None:
        data = payload["objective"]
        objective = Objective(**data)
        self.objectives[objective.objective_id] = objective
        self._ids.observe(objective.objective_id)
        supersedes = payload.get("supersedes")
        if supersedes and supersedes in self.objectives:
            old = self.objectives[supersedes]
            old.status = "superseded"
            old.superseded_by = objective.objective_id

    def set_objective(
        self,
        horizon: str,
        statement: str,
        key_results: list[dict[str, Any]],
        owner_role: str,
        actor: str,
        effective_from: str | None = None,
    ) -> Objective:
        activity = "set-quarterly-targets" if owner_role == "cco" else "set-optimization-target"
        self._policy.require(actor, activity)
        if horizon not in ("yearly", "quarterly"):
            raise HadaError("malformed-objective", f"unknown horizon '{horizon}'")
        if not key_results:
            raise HadaError("malformed-objective", "objective has no key results")
        for kr in key_results:
            if kr.get("direction") not in ("maximize", "minimize"):
                raise HadaError("malformed-objective", "key result needs direction maximize|minimize")
        with self._lock:
            previous = self.active_objective(owner_role, horizon)
            objective = Objective(
                objective_id=self._ids.next("OBJ"),
                horizon=horizon,
                statement=statement,
                key_results=key_results,
                owner_role=owner_role,
                effective_from=effective_from or self._clock.now_iso(),
            )
            payload = {
                "action": "set",
                "objective": objective.to_dict(),
                "supersedes": previous.objective_id if previous else None,
                "actor": actor,
            }
            self._apply_objective(payload)
            self._record("objective", payload)
        self._notify(
            activity,
            actor,
            f"{horizon.capitalize()} objective updated: {statement}",
            {"objective_id": objective.objective_id},
        )
        return objective

    def active_objective(self, owner_role: str, horizon: str) -> Objective | None:
        for objective in self.objectives.values():
            if (
                objective.owner_role == owner_role
                and objective.horizon == horizon
                and objective.status == "active"
            ):
                return objective
        return None

    def list_objectives(self, status: str | None = None) -> list[Objective]:
        out = list(self.objectives.values())
        if status:
            out = [o for o in out if o.status == status]
        return out

    # -- KPI bindings ------------------------------------------------------------

    def _apply_kpi_binding(self, payload: dict[str, Any]) -> None:
        binding = KpiBinding(**payload["binding"])
        self.bindings[binding.binding_id] = binding
        self._ids.observe(binding.binding_id)
        for replaced in payload.get("replaces", []):
            if replaced in self.bindings:
                self.bindings[replaced].replaced_by = binding.binding_id

    def bind_kpi(self, tool_id: str, objective_id: str, kpi: str, weight: float, actor: str) -> KpiBinding:
        self._policy.require(actor, "set-optimization-target")
        if not 0.0 <= weight <= 1.0:
            raise HadaError("weight-out-of-range", f"weight {weight} outside [0, 1]")
        if self._tool_exists is not None and not self._tool_exists(tool_id):
            raise NotFound("unknown-tool", tool_id)
        if objective_id not in self.objectives:
            raise NotFound("unknown-objective", objective_id)
        with self._lock:
            replaces = [
                b.binding_id
                for b in self.active_bindings(tool_id)
                if b.objective_id == objective_id and b.kpi == kpi
            ]
            binding = KpiBinding(
                binding_id=self._ids.next("KPI"),
                tool_id=tool_id,
                objective_id=objective_id,
                kpi=kpi,
                weight=weight,
                set_by=actor,
                timestamp=self._clock.now_iso(),
            )
            payload = {"action": "bind", "binding": binding.to_dict(), "replaces": replaces, "actor": actor}
            self._apply_kpi_binding(payload)
            self._record("kpi-binding", payload)
            ticket = self.create_ticket(
                kind="model-development",
                subject=f"Align {tool_id} with target '{kpi}'",
                body=(
                    f"Develop and validate a new version of {tool_id} optimising for "
                    f"'{kpi}' (weight {weight}) under objective {objective_id}."
                ),
                raised_by=actor,
                assigned_role="data-scientist",
                links=[binding.binding_id, objective_id],
            )
        self._notify(
            "set-optimization-target",
            actor,
            f"Optimization target for {tool_id} set to '{kpi}'",
            {"binding_id": binding.binding_id, "ticket_id": ticket.ticket_id},
        )
        return binding

    def active_bindings(self, tool_id: str) -> list[KpiBinding]:
        out = []
        for binding in self.bindings.values():
            if binding.tool_id != tool_id or binding.replaced_by is not None:
                continue
            objective = self.objectives.get(binding.objective_id)
            if objective is not None and objective.status == "active":
                out.append(binding)
        return out

    def effective_weights(self, tool_id: str) -> dict[str, float]:
        """Active binding weights normalized to sum to 1."""
        active = self.active_bindings(tool_id)
        total = sum(b.weight for b in active)
        if not active or total == 0:
            return {}
        return {b.binding_id: b.weight / total for b in active}

    def bound_kpis(self, tool_id: str) -> list[str]:
        return [b.kpi for b in self.active_bindings(tool_id)]

    # -- model versions ------------------------------------------------------------

    def _apply_version(self, payload: dict[str, Any]) -> None:
        if payload["action"] == "register":
            version = ModelVersion(**payload["version"])
            self.versions[(version.tool_id, version.version)] = version
        else:  # status
            version = self.versions[(payload["tool_id"], payload["version"])]
            version.status = payload["status"]
            if payload.get("approval"):
                version.approval = payload["approval"]
            if payload.get("validation_metrics"):
                version.validation_metrics = payload["validation_metrics"]

    def register_version(
        self,
        tool_id: str,
        version: str,
        feature_list: list[str],
        tree: dict[str, Any],
        validation_metrics: dict[str, float],
        actor: str,
    ) -> ModelVersion:
        self._policy.require(actor, "optimize-ai-tools")
        if not tree:
            raise HadaError("missing-tree", f"version {version} carries no decision tree")
        with self._lock:
            if (tool_id, version) in self.versions:
                raise HadaError("duplicate-version", f"{tool_id} version {version} already registered")
            gating = self.bound_kpis(tool_id)
            has_gate_metrics = bool(validation_metrics) and all(
                self._metric_key(kpi) in validation_metrics for kpi in gating
            )
            record = ModelVersion(
                tool_id=tool_id,
                version=version,
                feature_list=list(feature_list),
                tree=tree,
                status="draft",
                validation_metrics=dict(validation_metrics),
                created_by=actor,
            )
            payload = {"action": "register", "version": record.to_dict()}
            self._apply_version(payload)
            self._record("version", payload)
            if has_gate_metrics:
                self._set_version_status(tool_id, version, "validated", actor)
                self._set_version_status(tool_id, version, "awaiting-approval", actor)
            ticket = self.create_ticket(
                kind="deployment",
                subject=f"Deploy {tool_id} version {version}",
                body=self._deployment_body(record, gating),
                raised_by=actor,
                assigned_role="business-manager",
                links=[f"{tool_id}@{version}"],
                state="awaiting-approval" if has_gate_metrics else "open",
                note="Awaiting Business Approval" if has_gate_metrics else None,
            )
        self._notify(
            "optimize-ai-tools",
            actor,
            f"{tool_id} version {version} registered ({record.status})",
            {"ticket_id": ticket.ticket_id, "version": f"{tool_id}@{version}"},
        )
        return self.versions[(tool_id, version)]

    @staticmethod
    def _metric_key(kpi: str) -> str:
        return {"expected-loss": "expected_loss_proxy", "acquisition-rate": "approval_rate"}.get(kpi, kpi)

    @staticmethod
    def _deployment_body(record: ModelVersion, gating: list[str]) -> str:
        parts = [
            f"Candidate {record.tool_id} version {record.version} by {record.created_by}.",
            f"Features: {', '.join(record.feature_list)}.",
        ]
        if record.validation_metrics:
            metrics = ", ".join(f"{k}={v}" for k, v in sorted(record.validation_metrics.items()))
            parts.append(f"Offline validation: {metrics}.")
        if gating:
            parts.append(f"Gating KPI(s): {', '.join(gating)}.")
        return " ".join(parts)

    def _set_version_status(
        self,
        tool_id: str,
        version: str,
        status: str,
        actor: str,
        approval: dict[str, Any] | None = None,
        note: str = "",
    ) -> None:
        record = self.versions.get((tool_id, version))
        if record is None:
            raise NotFound("unknown-model", f"{tool_id}@{version}")
        if status not in VERSION_EDGES[record.status]:
            raise HadaError(
                "illegal-transition",
                f"version {tool_id}@{version} cannot move {record.status} -> {status}",
            )
        payload = {
            "action": "status",
            "tool_id": tool_id,
            "version": version,
            "status": status,
            "actor": actor,
            "approval": approval,
            "note": note,
        }
        self._apply_version(payload)
        self._record("version", payload)

    def approve_deployment(self, ticket_id: str, decision: str, actor: str, note: str = "") -> ModelVersion:
        auth = self._policy.require(actor, "approve-deployment")
        with self._lock:
            ticket = self.tickets.get(ticket_id)
            if ticket is None:
                raise NotFound("unknown-ticket", ticket_id)
            if ticket.kind != "deployment" or ticket.state != "awaiting-approval":
                raise HadaError(
                    "ticket-wrong-state",
                    f"ticket {ticket_id} is {ticket.state}, expected a deployment ticket awaiting approval",
                )
            tool_id, _, version = ticket.links[0].partition("@")
            record = self.versions.get((tool_id, version))
            if record is None:
                raise NotFound("unknown-model", ticket.links[0])
            if decision == "approve":
                blocked = sorted(set(record.feature_list) & self.active_watchlist())
                if blocked:
                    raise HadaError(
                        "watchlist-violation",
                        f"version {version} uses watchlisted attribute(s): {', '.join(blocked)}",
                        attributes=blocked,
                    )
                previous = self.production_version(tool_id)
                if previous is not None:
                    self._set_version_status(tool_id, previous.version, "deprecated", actor, note="superseded")
                approval = {"role": actor, "timestamp": self._clock.now_iso(), "ticket_id": ticket_id}
                self._set_version_status(tool_id, version, "production", actor, approval=approval)
                self.ticket_transition(ticket_id, "approved", actor, note or "Approved—Deploying")
                self.ticket_transition(ticket_id, "done", actor, "Deployment complete")
            elif decision == "reject":
                self._set_version_status(tool_id, version, "deprecated", actor, note=note or "rejected")
                self.ticket_transition(ticket_id, "rejected", actor, note or "Rejected")
            else:
                raise HadaError("ticket-wrong-state", f"unknown decision '{decision}'")
        self._notify(
            "approve-deployment",
            actor,
            f"Deployment {decision}d for {tool_id} version {version}",
            {"ticket_id": ticket_id, "version": f"{tool_id}@{version}", "accountable": auth.accountable},
        )
        return self.versions[(tool_id, version)]

    def production_version(self, tool_id: str) -> ModelVersion | None:
        for record in self.versions.values():
            if record.tool_id == tool_id and record.status == "production":
                return record
        return None

    def list_versions(self, tool_id: str | None = None, status: str | None = None) -> list[ModelVersion]:
        out = list(self.versions.values())
        if tool_id:
            out = [v for v in out if v.tool_id == tool_id]
        if status:
            out = [v for v in out if v.status == status]
        return out

    def get_version(self, tool_id: str, version: str) -> ModelVersion:
        record = self.versions.get((tool_id, version))
        if record is None:
            raise NotFound("unknown-model", f"{tool_id}@{version}")
        return record

    # -- watchlist ------------------------------------------------------------

    def _apply_watchlist(self, payload: dict[str, Any]) -> None:
        self.watchlist.append(WatchlistEntry(**payload["entry"]))

    def flag_attribute(
        self,
        attribute: str,
        reason: str,
        actor: str,
        source_ticket: str | None = None,
    ) -> WatchlistEntry:
        self._policy.require(actor, "handle-ethics-concern")
        with self._lock:
            if attribute in self.active_watchlist():
                raise HadaError("duplicate-active-entry", f"'{attribute}' is already watchlisted")
            entry = WatchlistEntry(
                attribute=attribute,
                flagged_by=actor,
                reason=reason,
                timestamp=self._clock.now_iso(),
                source_ticket=source_ticket,
            )
            payload = {"action": "flag", "entry": entry.to_dict()}
            self._apply_watchlist(payload)
            self._record("watchlist", payload)
            retrain_tickets = []
            for record in self.list_versions(status="production"):
                if attribute in record.feature_list:
                    ticket = self.create_ticket(
                        kind="model-development",
                        subject=f"Retrain {record.tool_id} without '{attribute}'",
                        body=(
                            f"Attribute '{attribute}' was flagged as sensitive "
                            f"({reason}). Retrain {record.tool_id} excluding it; current "
                            f"production version {record.version} uses it."
                        ),
                        raised_by=actor,
                        assigned_role="data-scientist",
                        links=[f"{record.tool_id}@{record.version}", f"watchlist:{attribute}"],
                    )
                    retrain_tickets.append(ticket.ticket_id)
        self._notify(
            "handle-ethics-concern",
            actor,
            f"Attribute '{attribute}' added to the sensitive-values watchlist",
            {"attribute": attribute, "retrain_tickets": retrain_tickets},
        )
        return entry

    def clear_attribute(self, attribute: str, reason: str, actor: str) -> WatchlistEntry:
        self._policy.require(actor, "handle-ethics-concern")
        with self._lock:
            if attribute not in self.active_watchlist():
                raise NotFound("unknown-source", f"'{attribute}' is not actively watchlisted")
            entry = WatchlistEntry(
                attribute=attribute,
                flagged_by=actor,
                reason=reason,
                timestamp=self._clock.now_iso(),
                cleared=True,
            )
            payload = {"action": "clear", "entry": entry.to_dict()}
            self._apply_watchlist(payload)
            self._record("watchlist", payload)
        return entry

    def active_watchlist(self) -> set[str]:
        state: dict[str, bool] = {}
        for entry in self.watchlist:
            state[entry.attribute] = not entry.cleared
        return {attr for attr, active in state.items() if active}

    # -- tickets ------------------------------------------------------------

    def _apply_ticket(self, payload: dict[str, Any]) -> None:
        if payload["action"] == "create":
            ticket = Ticket(**payload["ticket"])
            self.tickets[ticket.ticket_id] = ticket
            self._ids.observe(ticket.ticket_id)
        elif payload["action"] == "note":
            ticket = self.tickets[payload["ticket_id"]]
            ticket.history.append(
                {
                    "state": ticket.state,
                    "actor": payload["actor"],
                    "timestamp": payload["timestamp"],
                    "note": payload.get("note", ""),
                }
            )
        else:  # transition
            ticket = self.tickets[payload["ticket_id"]]
            ticket.state = payload["to"]
            ticket.history.append(
                {
                    "state": payload["to"],
                    "actor": payload["actor"],
                    "timestamp": payload["timestamp"],
                    "note": payload.get("note", ""),
                }
            )

    def create_ticket(
        self,
        kind: str,
        subject: str,
        body: str,
        raised_by: str,
        assigned_role: str,
        links: list[str] | None = None,
        actor: str = "hada",
        state: str = "open",
        note: str | None = None,
    ) -> Ticket:
        self._policy.require(actor, "create-work-assignments")
        prefix = TICKET_PREFIX.get(kind)
        if prefix is None:
            raise HadaError("illegal-ticket-transition", f"unknown ticket kind '{kind}'")
        with self._lock:
            now = self._clock.now_iso()
            ticket = Ticket(
                ticket_id=self._ids.next_ticket(prefix),
                kind=kind,
                state=state,
                subject=subject,
                body=body,
                raised_by=raised_by,
                assigned_role=assigned_role,
                links=list(links or []),
                history=[{"state": state, "actor": actor, "timestamp": now, "note": note or "created"}],
                watchers=sorted({raised_by, assigned_role}),
            )
            payload = {"action": "create", "ticket": ticket.to_dict()}
            self._apply_ticket(payload)
            self._record("ticket", payload)
        self._notify(
            "create-work-assignments",
            actor,
            f"Ticket {ticket.ticket_id} ({kind}) created: {subject}",
            {"ticket_id": ticket.ticket_id},
        )
        return ticket

    def annotate_ticket(self, ticket_id: str, note: str, actor: str) -> Ticket:
        """Attach a note (e.g. a consultation record) without changing state."""
        with self._lock:
            if ticket_id not in self.tickets:
                raise NotFound("unknown-ticket", ticket_id)
            payload = {
                "action": "note",
                "ticket_id": ticket_id,
                "actor": actor,
                "timestamp": self._clock.now_iso(),
                "note": note,
            }
            self._apply_ticket(payload)
            self._record("ticket", payload)
            return self.tickets[ticket_id]

    def ticket_transition(self, ticket_id: str, new_state: str, actor: str, note: str = "") -> Ticket:
        with self._lock:
            ticket = self.tickets.get(ticket_id)
            if ticket is None:
                raise NotFound("unknown-ticket", ticket_id)
            if new_state not in TICKET_EDGES.get(ticket.state, frozenset()):
                raise HadaError(
                    "illegal-ticket-transition",
                    f"ticket {ticket_id} cannot move {ticket.state} -> {new_state}",
                )
            payload = {
                "action": "transition",
                "ticket_id": ticket_id,
                "from": ticket.state,
                "to": new_state,
                "actor": actor,
                "timestamp": self._clock.now_iso(),
                "note": note,
            }
            self._apply_ticket(payload)
            self._record("ticket", payload)
            watchers = [w for w in ticket.watchers if w != actor]
        if watchers:
            self._notify(
                "create-work-assignments",
                actor,
                f"Ticket {ticket_id} moved to {new_state}" + (f": {note}" if note else ""),
                {"ticket_id": ticket_id, "state": new_state, "watchers": watchers},
            )
        return self.tickets[ticket_id]

    def list_tickets(self, state: str | None = None, kind: str | None = None) -> list[Ticket]:
        out = list(self.tickets.values())
        if state:
            out = [t for t in out if t.state == state]
        if kind:
            out = [t for t in out if t.kind == kind]
        return out

    def get_ticket(self, ticket_id: str) -> Ticket:
        ticket = self.tickets.get(ticket_id)
        if ticket is None:
            raise NotFound("unknown-ticket", ticket_id)
        return ticket

    # -- bootstrap seeding ------------------------------------------------------------

    def set_notifier(self, notifier: Notifier | None) -> None:
        self._notifier = notifier

    def set_tool_checker(self, tool_exists: Callable[[str], bool] | None) -> None:
        self._tool_exists = tool_exists

    def seed_version(
        self,
        tool_id: str,
        version: str,
        feature_list: list[str],
        tree: dict[str, Any],
        validation_metrics: dict[str, float],
        created_by: str,
        status: str = "production",
    ) -> ModelVersion:
        """Bootstrap-only: installs a pre-approved baseline version directly.

        Used once on a fresh ledger to stand up the already-running tool;
        everything after that goes through register/approve.
        """
        with self._lock:
            if (tool_id, version) in self.versions:
                raise HadaError("duplicate-version", f"{tool_id} version {version} already registered")
            record = ModelVersion(
                tool_id=tool_id,
                version=version,
                feature_list=list(feature_list),
                tree=tree,
                status=status,
                validation_metrics=dict(validation_metrics),
                created_by=created_by,
                approval={"role": "hada", "timestamp": self._clock.now_iso(), "ticket_id": None},
            )
            payload = {"action": "register", "version": record.to_dict()}
            self._apply_version(payload)
            self._record("version", payload)
            return record

    def seed_objective(
        self,
        horizon: str,
        statement: str,
        key_results: list[dict[str, Any]],
        owner_role: str,
    ) -> Objective:
        """Bootstrap-only: installs a baseline objective without a policy check."""
        with self._lock:
            objective = Objective(
                objective_id=self._ids.next("OBJ"),
                horizon=horizon,
                statement=statement,
                key_results=key_results,
                owner_role=owner_role,
                effective_from=self._clock.now_iso(),
            )
            payload = {"action": "set", "objective": objective.to_dict(), "supersedes": None, "actor": owner_role}
            self._apply_objective(payload)
            self._record("objective", payload)
            return objective

    def seed_watchlist(self, attribute: str, reason: str, flagged_by: str) -> WatchlistEntry:
        """Bootstrap-only: installs a default watchlist entry without a policy check."""
        with self._lock:
            entry = WatchlistEntry(
                attribute=attribute,
                flagged_by=flagged_by,
                reason=reason,
                timestamp=self._clock.now_iso(),
            )
            payload = {"action": "flag", "entry": entry.to_dict()}
            self._apply_watchlist(payload)
            self._record("watchlist", payload)
            return entry

    def seed_binding(
        self, tool_id: str, objective_id: str, kpi: str, weight: float, set_by: str
    ) -> KpiBinding:
        """Bootstrap-only: installs the baseline KPI binding without a ticket."""
        with self._lock:
            binding = KpiBinding(
                binding_id=self._ids.next("KPI"),
                tool_id=tool_id,
                objective_id=objective_id,
                kpi=kpi,
                weight=weight,
                set_by=set_by,
                timestamp=self._clock.now_iso(),
            )
            payload = {"action": "bind", "binding": binding.to_dict(), "replaces": [], "actor": set_by}
            self._apply_kpi_binding(payload)
            self._record("kpi-binding", payload)
            return binding

    # -- ethics triggers ------------------------------------------------------------

    def _apply_ethics_flag(self, payload: dict[str, Any]) -> None:
        trigger = EthicsTrigger(**payload["trigger"])
        self.triggers[trigger.trigger_id] = trigger
        self._ids.observe(trigger.trigger_id)

    def record_trigger(self, trigger: EthicsTrigger, action: str) -> None:
        payload = {"action": action, "trigger": trigger.to_dict()}
        self._apply_ethics_flag(payload)
        self._record("ethics-flag", payload)

    def get_trigger(self, trigger_id: str) -> EthicsTrigger:
        trigger = self.triggers.get(trigger_id)
        if trigger is None:
            raise NotFound("unknown-trigger", trigger_id)
        return trigger

    def list_triggers(self, state: str | None = None) -> list[EthicsTrigger]:
        out = list(self.triggers.values())
        if state:
            out = [t for t in out if t.state == state]
        return out

    # -- snapshots ------------------------------------------------------------

    def snapshot(self) -> dict[str, Any]:
        """Canonical view of catalogue state, for restart-equivalence checks."""
        with self._lock:
            return {
                "objectives": {k: o.to_dict() for k, o in sorted(self.objectives.items())},
                "bindings": {k: b.to_dict() for k, b in sorted(self.bindings.items())},
                "versions": {
                    f"{t}@{v}": r.to_dict() for (t, v), r in sorted(self.versions.items())
                },
                "watchlist": [e.to_dict() for e in self.watchlist],
                "tickets": {k: t.to_dict() for k, t in sorted(self.tickets.items())},
                "triggers": {k: t.to_dict() for k, t in sorted(self.triggers.items())},
            }
