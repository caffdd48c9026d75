"""Side-effect checks for scenario steps.

Every check inspects observable runtime state only (catalogue queries,
ledger entries, tasks) and returns the evidence pointers that satisfied it,
so an assertion can never pass on absence of evidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import HadaError


@dataclass
class CheckResult:
    ok: bool
    detail: str
    evidence: list[dict[str, Any]] = field(default_factory=list)


def _ledger_indices(runtime, kind: str, predicate) -> list[int]:
    return [e.index for e in runtime.ledger.iter_kind(kind) if predicate(e.payload)]


def check_ticket(runtime, ctx, params) -> CheckResult:
    ticket_id = params.get("id")
    try:
        ticket = runtime.catalog.get_ticket(ticket_id)
    except HadaError:
        return CheckResult(False, f"ticket {ticket_id} does not exist")
    for key, attr in (("state", "state"), ("kind", "kind"), ("assigned", "assigned_role")):
        if key in params and getattr(ticket, attr) != params[key]:
            return CheckResult(False, f"ticket {ticket_id}.{attr} = {getattr(ticket, attr)!r}, wanted {params[key]!r}")
    if "contains" in params and params["contains"] not in (ticket.subject + " " + ticket.body):
        return CheckResult(False, f"ticket {ticket_id} text lacks {params['contains']!r}")
    if "note_contains" in params and not any(params["note_contains"] in h.get("note", "") for h in ticket.history):
        return CheckResult(False, f"ticket {ticket_id} history lacks note {params['note_contains']!r}")
    evidence = [{"kind": "ticket", "id": ticket_id}]
    evidence += [{"kind": "ledger", "index": i} for i in _ledger_indices(
        runtime, "ticket", lambda p: p.get("ticket", {}).get("ticket_id") == ticket_id or p.get("ticket_id") == ticket_id
    )][:2]
    return CheckResult(True, f"ticket {ticket_id} ok", evidence)


def check_ticket_note(runtime, ctx, params) -> CheckResult:
    return check_ticket(runtime, ctx, params)


def check_objective_superseded(runtime, ctx, params) -> CheckResult:
    owner, horizon = params["owner"], params["horizon"]
    needle = params.get("statement_contains", "")
    hits = [
        o for o in runtime.catalog.list_objectives("superseded")
        if o.owner_role == owner and o.horizon == horizon and needle.lower() in o.statement.lower()
    ]
    if not hits:
        return CheckResult(False, f"no superseded {horizon} objective for {owner} matching {needle!r}")
    chosen = hits[-1]
    indices = _ledger_indices(
        runtime, "objective", lambda p: p.get("objective", {}).get("objective_id") == chosen.objective_id
    )
    return CheckResult(True, f"objective {chosen.objective_id} superseded",
                       [{"kind": "ledger", "index": i} for i in indices])


def check_objective_active(runtime, ctx, params) -> CheckResult:
    owner, horizon = params["owner"], params["horizon"]
    objective = runtime.catalog.active_objective(owner, horizon)
    if objective is None:
        return CheckResult(False, f"no active {horizon} objective for {owner}")
    needle = params.get("statement_contains", "")
    if needle and needle.lower() not in objective.statement.lower():
        return CheckResult(False, f"active objective statement {objective.statement!r} lacks {needle!r}")
    indices = _ledger_indices(
        runtime, "objective", lambda p: p.get("objective", {}).get("objective_id") == objective.objective_id
    )
    return CheckResult(True, f"objective {objective.objective_id} active",
                       [{"kind": "ledger", "index": i} for i in indices])


def check_binding(runtime, ctx, params) -> CheckResult:
    tool = params["tool"]
    active = runtime.catalog.active_bindings(tool)
    hits = [b for b in active if b.kpi == params["kpi"]]
    if not hits:
        return CheckResult(False, f"no active binding {params['kpi']} on {tool}")
    binding = hits[-1]
    if "weight" in params and abs(binding.weight - float(params["weight"])) > 1e-9:
        return CheckResult(False, f"binding weight {binding.weight} != {params['weight']}")
    indices = _ledger_indices(
        runtime, "kpi-binding", lambda p: p.get("binding", {}).get("binding_id") == binding.binding_id
    )
    return CheckResult(True, f"binding {binding.binding_id} ok", [{"kind": "ledger", "index": i} for i in indices])


def check_weights_normalized(runtime, ctx, params) -> CheckResult:
    tool = params["tool"]
    weights = runtime.catalog.effective_weights(tool)
    if "count" in params and len(weights) != int(params["count"]):
        return CheckResult(False, f"{len(weights)} active bindings, wanted {params['count']}")
    total = sum(weights.values())
    if abs(total - 1.0) > 1e-9:
        return CheckResult(False, f"effective weights sum to {total}")
    indices = [e.index for e in runtime.ledger.iter_kind("kpi-binding")][-len(weights):]
    return CheckResult(True, "weights normalized", [{"kind": "ledger", "index": i} for i in indices])


def check_version(runtime, ctx, params) -> CheckResult:
    try:
        record = runtime.catalog.get_version(params["tool"], params["version"])
    except HadaError:
        return CheckResult(False, f"version {params['version']} not registered")
    if "status" in params and record.status != params["status"]:
        return CheckResult(False, f"version {record.version} status {record.status!r}, wanted {params['status']!r}")
    indices = _ledger_indices(
        runtime, "version",
        lambda p: (p.get("version", {}).get("version") if isinstance(p.get("version"), dict) else p.get("version")) == params["version"],
    )
    return CheckResult(True, f"version {record.version} ok", [{"kind": "ledger", "index": i} for i in indices[:3]])


def check_version_excludes(runtime, ctx, params) -> CheckResult:
    record = runtime.catalog.get_version(params["tool"], params["version"])
    if params["attribute"] in record.feature_list:
        return CheckResult(False, f"version {record.version} still uses {params['attribute']}")
    indices = _ledger_indices(
        runtime, "version",
        lambda p: isinstance(p.get("version"), dict) and p["version"].get("version") == params["version"],
    )
    return CheckResult(True, "exclusion ok", [{"kind": "ledger", "index": i} for i in indices])


def check_production(runtime, ctx, params) -> CheckResult:
    record = runtime.catalog.production_version(params["tool"])
    if record is None or record.version != params["version"]:
        got = record.version if record else None
        return CheckResult(False, f"production version is {got}, wanted {params['version']}")
    indices = _ledger_indices(
        runtime, "version", lambda p: p.get("status") == "production" and p.get("version") == params["version"]
    )
    return CheckResult(True, f"{params['version']} in production", [{"kind": "ledger", "index": i} for i in indices])


def check_watchlist_active(runtime, ctx, params) -> CheckResult:
    attribute = params["attribute"]
    if attribute not in runtime.catalog.active_watchlist():
        return CheckResult(False, f"{attribute} is not on the active watchlist")
    indices = _ledger_indices(
        runtime, "watchlist", lambda p: p.get("entry", {}).get("attribute") == attribute and p.get("action") == "flag"
    )
    return CheckResult(True, f"{attribute} watchlisted", [{"kind": "ledger", "index": i} for i in indices])


def check_watchlist_inactive(runtime, ctx, params) -> CheckResult:
    attribute = params["attribute"]
    if attribute in runtime.catalog.active_watchlist():
        return CheckResult(False, f"{attribute} unexpectedly watchlisted")
    return CheckResult(True, f"{attribute} not watchlisted", [])


def check_decision(runtime, ctx, params) -> CheckResult:
    try:
        record, proof = runtime.ledger.query_decision(params["id"])
    except HadaError:
        return CheckResult(False, f"decision {params['id']} not found")
    for key in ("outcome", "model_version"):
        if key in params and getattr(record, key) != params[key]:
            return CheckResult(False, f"decision {key} = {getattr(record, key)!r}, wanted {params[key]!r}")
    evidence = [{"kind": "decision", "id": record.decision_id}]
    evidence += [{"kind": "ledger", "index": i} for i in proof]
    return CheckResult(True, f"decision {record.decision_id} ok", evidence)


def check_decision_path_feature(runtime, ctx, params) -> CheckResult:
    record, proof = runtime.ledger.query_decision(params["id"])
    if not any(step["feature"] == params["feature"] for step in record.decision_path):
        return CheckResult(False, f"decision path lacks feature {params['feature']}")
    return CheckResult(True, "path feature ok", [{"kind": "ledger", "index": i} for i in proof])


def check_last_decision(runtime, ctx, params) -> CheckResult:
    ids = runtime.ledger.list_decisions()
    if not ids:
        return CheckResult(False, "no decisions recorded")
    return check_decision(runtime, ctx, {**params, "id": ids[-1]})


def check_invocation(runtime, ctx, params) -> CheckResult:
    hits = _ledger_indices(
        runtime,
        "invocation",
        lambda p: p.get("tool_id") == params["tool"] and (("caller" not in params) or p.get("caller") == params["caller"]),
    )
    if not hits:
        return CheckResult(False, f"no ledgered invocation of {params['tool']}")
    return CheckResult(True, "invocation ok", [{"kind": "ledger", "index": hits[-1]}])


def check_metric_improved(runtime, ctx, params) -> CheckResult:
    better = runtime.catalog.get_version(params["tool"], params["better"])
    worse = runtime.catalog.get_version(params["tool"], params["worse"])
    metric = params["metric"]
    if metric not in better.validation_metrics or metric not in worse.validation_metrics:
        return CheckResult(False, f"metric {metric} missing on a version")
    if not better.validation_metrics[metric] < worse.validation_metrics[metric]:
        return CheckResult(
            False,
            f"{metric}: {params['better']}={better.validation_metrics[metric]} not below "
            f"{params['worse']}={worse.validation_metrics[metric]}",
        )
    indices = _ledger_indices(
        runtime, "version",
        lambda p: isinstance(p.get("version"), dict) and p["version"].get("version") == params["better"],
    )
    return CheckResult(True, "metric improved", [{"kind": "ledger", "index": i} for i in indices])


def check_notification_pending(runtime, ctx, params) -> CheckResult:
    pending = runtime.controller.pending_notifications(params["role"])
    for task in pending:
        for part in task.messages[0].parts:
            if part.kind == "data" and (("activity" not in params) or part.data.get("activity") == params["activity"]):
                refs = part.data.get("refs", {})
                evidence = [{"kind": "ticket", "id": refs["ticket_id"]}] if refs.get("ticket_id") else []
                return CheckResult(True, f"notification pending for {params['role']}", evidence)
    return CheckResult(False, f"no pending notification for {params['role']} ({params.get('activity')})")


def check_trigger(runtime, ctx, params) -> CheckResult:
    hits = [
        t
        for t in runtime.catalog.list_triggers()
        if (("cause" not in params) or t.cause == params["cause"])
        and (("attribute" not in params) or t.subject_attribute == params["attribute"])
        and (("state" not in params) or t.state == params["state"])
    ]
    if not hits:
        return CheckResult(False, f"no ethics trigger matching {params}")
    trigger = hits[-1]
    indices = _ledger_indices(
        runtime, "ethics-flag", lambda p: p.get("trigger", {}).get("trigger_id") == trigger.trigger_id
    )
    evidence = [{"kind": "ticket", "id": trigger.resulting_ticket}]
    evidence += [{"kind": "ledger", "index": i} for i in indices]
    return CheckResult(True, f"trigger {trigger.trigger_id} ok", evidence)


def check_no_raised_triggers(runtime, ctx, params) -> CheckResult:
    raised = runtime.catalog.list_triggers(state="raised")
    if raised:
        return CheckResult(False, f"{len(raised)} trigger(s) still raised: {[t.trigger_id for t in raised]}")
    resolved = runtime.catalog.list_triggers(state="resolved")
    evidence = [{"kind": "ticket", "id": t.resulting_ticket} for t in resolved[-2:]]
    return CheckResult(True, "no raised triggers", evidence)


def check_audit_replay_recorded(runtime, ctx, params) -> CheckResult:
    hits = _ledger_indices(
        runtime,
        "decision",
        lambda p: p.get("record_type") == "audit-replay" and p.get("model_version") == params.get("pinned"),
    )
    if not hits:
        return CheckResult(False, f"no audit-replay entry pinned to {params.get('pinned')}")
    return CheckResult(True, "audit replay recorded", [{"kind": "ledger", "index": hits[-1]}])


def check_artifact_present(runtime, ctx, params) -> CheckResult:
    task = runtime.store.get(ctx["task_id"])
    for artifact in task.artifacts:
        for part in artifact.parts:
            if part.kind == "data" and part.data.get("kind") == params.get("kind"):
                decision_id = part.data.get("decision_id")
                evidence = [{"kind": "decision", "id": decision_id}] if decision_id else []
                return CheckResult(True, "artifact present", evidence)
    return CheckResult(False, f"no {params.get('kind')} artifact on task {ctx['task_id']}")


def check_task_state(runtime, ctx, params) -> CheckResult:
    task = runtime.store.get(ctx["task_id"])
    if task.state.value != params["state"]:
        return CheckResult(False, f"task {task.task_id} state {task.state.value}, wanted {params['state']}")
    return CheckResult(True, "task state ok", [])


def check_ledger_valid(runtime, ctx, params) -> CheckResult:
    result = runtime.ledger.verify_chain()
    if not result.valid:
        return CheckResult(False, f"ledger invalid at {result.bad_index}: {result.reason}")
    head = runtime.ledger.verify_head()
    if not head.valid:
        return CheckResult(False, f"head checkpoint mismatch: {head.reason}")
    last = max(len(runtime.ledger) - 1, 0)
    return CheckResult(True, "ledger valid", [{"kind": "ledger", "index": last}])


CHECKS = {
    "ticket": check_ticket,
    "ticket-note": check_ticket_note,
    "objective-superseded": check_objective_superseded,
    "objective-active": check_objective_active,
    "binding": check_binding,
    "weights-normalized": check_weights_normalized,
    "version": check_version,
    "version-excludes": check_version_excludes,
    "production": check_production,
    "watchlist-active": check_watchlist_active,
    "watchlist-inactive": check_watchlist_inactive,
    "decision": check_decision,
    "decision-path-feature": check_decision_path_feature,
    "last-decision": check_last_decision,
    "invocation": check_invocation,
    "metric-improved": check_metric_improved,
    "notification-pending": check_notification_pending,
    "no-raised-triggers": check_no_raised_triggers,
    "trigger": check_trigger,
    "audit-replay-recorded": check_audit_replay_recorded,
    "artifact-present": check_artifact_present,
    "task-state": check_task_state,
    "ledger-valid": check_ledger_valid,
}


def run_check(runtime, ctx: dict[str, Any], params: dict[str, Any]) -> CheckResult:
    name = params.get("check")
    checker = CHECKS.get(name)
    if checker is None:
        return CheckResult(False, f"unknown check kind {name!r}")
    try:
        return checker(runtime, ctx, params)
    except HadaError as exc:
        return CheckResult(False, f"check {name} errored: {exc.message}")
