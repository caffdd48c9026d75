"""Ethics-trigger engine.

A trigger is raised by a customer complaint, a watchlisted attribute passing
through a tool invocation, or a manual escalation. Every trigger opens an
ethics ticket assigned to the value-and-ethics role; resolving one can flag
an attribute (which itself forces retraining of any production model using
it) and is recorded back on the ledger.
"""

from __future__ import annotations

from typing import Any, Callable

from .catalog import Catalog, EthicsTrigger
from .errors import HadaError, NotFound
from .policy import PolicyService

CAUSES = ("customer-complaint", "watchlist-hit", "manual")


class EthicsEngine:
    def __init__(
        self,
        catalog: Catalog,
        policy: PolicyService,
        ids: Any,
        source_exists: Callable[[str], bool] | None = None,
    ) -> None:
        self._catalog = catalog
        self._policy = policy
        self._ids = ids
        self._source_exists = source_exists or (lambda ref: True)

    def raise_trigger(
        self,
        cause: str,
        subject_attribute: str | None,
        source: str,
        raised_by: str,
        detail: str = "",
    ) -> EthicsTrigger:
        if cause not in CAUSES:
            raise HadaError("unknown-source", f"unknown trigger cause '{cause}'")
        if not self._source_exists(source):
            raise NotFound("unknown-source", source)
        subject = f" about attribute '{subject_attribute}'" if subject_attribute else ""
        ticket = self._catalog.create_ticket(
            kind="ethics",
            subject=f"Ethics review{subject}",
            body=detail or f"Trigger cause: {cause}; source: {source}.",
            raised_by=raised_by,
            assigned_role="value-ethics-manager",
            links=[source],
        )
        trigger = EthicsTrigger(
            trigger_id=self._ids.next("TRG"),
            cause=cause,
            subject_attribute=subject_attribute,
            source=source,
            resulting_ticket=ticket.ticket_id,
            state="raised",
            raised_by=raised_by,
        )
        self._catalog.record_trigger(trigger, "raise")
        return trigger

    def resolve_trigger(self, trigger_id: str, resolution: dict[str, Any], actor: str) -> EthicsTrigger:
        self._policy.require(actor, "handle-ethics-concern")
        trigger = self._catalog.get_trigger(trigger_id)
        if trigger.state == "resolved":
            raise HadaError("unknown-trigger", f"trigger {trigger_id} already resolved")

        flagged = resolution.get("flag_attribute")
        want_retrain = bool(resolution.get("retrain"))
        actions: list[str] = []
        retrain_before = {t.ticket_id for t in self._catalog.list_tickets(kind="model-development")}
        if flagged:
            self._catalog.flag_attribute(
                flagged,
                reason=f"ethics trigger {trigger_id} ({trigger.cause})",
                actor=actor,
                source_ticket=trigger.resulting_ticket,
            )
            actions.append(f"watchlisted '{flagged}'")
        retrain_created = [
            t.ticket_id
            for t in self._catalog.list_tickets(kind="model-development")
            if t.ticket_id not in retrain_before
        ]
        if want_retrain and not retrain_created:
            attribute = flagged or trigger.subject_attribute
            ticket = self._catalog.create_ticket(
                kind="model-development",
                subject=f"Retrain without '{attribute}'" if attribute else "Retrain after ethics review",
                body=f"Retraining mandated while resolving ethics trigger {trigger_id}.",
                raised_by=actor,
                assigned_role="data-scientist",
                links=[trigger.resulting_ticket],
            )
            retrain_created.append(ticket.ticket_id)
        if retrain_created:
            actions.append(f"retrain ticket(s) {', '.join(retrain_created)}")
        if resolution.get("dismiss") and not actions:
            actions.append("dismissed without catalogue changes")

        eth_ticket = self._catalog.get_ticket(trigger.resulting_ticket)
        if eth_ticket.state == "open":
            self._catalog.ticket_transition(eth_ticket.ticket_id, "in-progress", actor, "under review")
        self._catalog.ticket_transition(
            eth_ticket.ticket_id, "done", actor, "; ".join(actions) or "resolved"
        )

        resolved = EthicsTrigger(
            trigger_id=trigger.trigger_id,
            cause=trigger.cause,
            subject_attribute=trigger.subject_attribute,
            source=trigger.source,
            resulting_ticket=trigger.resulting_ticket,
            state="resolved",
            raised_by=trigger.raised_by,
        )
        self._catalog.record_trigger(resolved, "update")
        return resolved
