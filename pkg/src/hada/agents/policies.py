"""Scripted dialog policies, one per stakeholder role.

Each policy is a deterministic (state, frame) -> (reply, effects, next state)
machine over its task's metadata. Replies deliberately carry the exact
operative phrases the governance flows hinge on ("Awaiting Business
Approval", "Approved—Deploying", ticket ids, decision references) so
transcripts are assertable and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, TYPE_CHECKING

from ..errors import HadaError
from ..policy import ROLE_NAMES
from .intents import IntentFrame
from .profiles import AgentProfile

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .controller import Services

MAX_TOOL_CALLS_PER_TURN = 3

LOAN_SLOT_FIELDS = ["Dependents", "CoapplicantIncome", "LoanAmount", "LoanTerm"]
SLOT_TITLES = {
    "Dependents": "Dependents: how many individuals depend on your income?",
    "CoapplicantIncome": "Co-applicant Income: if applicable, the co-applicant's monthly income",
    "LoanAmount": "LoanAmount: how much money are you requesting?",
    "LoanTerm": "LoanTerm: over how many months would you like to repay?",
}


@dataclass
class TurnContext:
    services: "Services"
    profile: AgentProfile
    task_id: str
    frame: IntentFrame
    state: str | None
    metadata: dict[str, Any]
    customer_id: str | None = None
    tool_calls: int = 0

    def invoke(self, tool_id: str, arguments: dict[str, Any]) -> dict[str, Any]:
        """Whitelisted, budgeted tool invocation on behalf of this agent."""
        if tool_id not in self.profile.allowed_tools:
            raise HadaError(
                "tool-denied",
                f"tool '{tool_id}' is outside the whitelist of {self.profile.agent_id}",
                tool=tool_id,
                agent=self.profile.agent_id,
            )
        if self.tool_calls >= MAX_TOOL_CALLS_PER_TURN:
            raise HadaError("tool-denied", "per-turn tool budget exhausted", tool=tool_id)
        self.tool_calls += 1
        invocation = self.services.bus.invoke(tool_id, arguments, self.profile.role, self.task_id)
        return invocation.result or {}

    def note(self, key: str, value: Any) -> None:
        if self.profile.memory is not None:
            self.profile.memory.note(self.profile.agent_id, key, value)


@dataclass
class TurnResult:
    reply: str
    task_action: str = "input-required"  # complete | input-required | fail
    next_state: str | None = None
    data: dict[str, Any] | None = None
    artifact: dict[str, Any] | None = None
    metadata: dict[str, Any] = field(default_factory=dict)


def _display(role: str) -> str:
    return ROLE_NAMES.get(role, role)


# -- customer ---------------------------------------------------------------


def _loan_missing(application: dict[str, Any]) -> list[str]:
    return [f for f in LOAN_SLOT_FIELDS if f not in application]


def _customer_loan(ctx: TurnContext) -> TurnResult:
    services = ctx.services
    state = ctx.state
    application = dict(ctx.metadata.get("application", {}))

    if ctx.frame.intent == "apply_loan" and state in (None, "start"):
        rate = services.runtime_config.get("rate_card", "the 3-month Euribor plus a 1.25 percent bank margin")
        return TurnResult(
            reply=(
                "Certainly! You're interested in a personal loan. The current rate is "
                f"calculated as {rate}. I can begin processing right away — first, let me "
                "verify the details we have in our CRM to be sure everything is up to date. "
                "Shall I go ahead?"
            ),
            next_state="crm_consent",
        )

    if state == "crm_consent":
        if not ctx.customer_id:
            raise HadaError("unknown-customer", "no customer record linked to this session")
        record = ctx.invoke("crmLookup", {"customer_id": ctx.customer_id})
        prefill = {k: v for k, v in record.items() if k != "customer_id"}
        application.update(prefill)
        listing = "; ".join(f"{k}: {v}" for k, v in prefill.items())
        return TurnResult(
            reply=f"Here is what the CRM shows — {listing}. Does everything look correct?",
            next_state="crm_confirm",
            metadata={"application": application},
        )

    if state == "crm_confirm":
        correction = ctx.frame.slots.get("correction")
        if correction:
            fieldname, value = correction
            record = ctx.invoke(
                "crmUpdate", {"customer_id": ctx.customer_id, "field": fieldname, "value": str(value)}
            )
            application.update({k: v for k, v in record.items() if k != "customer_id"})
            return TurnResult(
                reply=f"Updated {fieldname} to {value} in our records. Does everything look correct now?",
                next_state="crm_confirm",
                metadata={"application": application},
            )
        missing = _loan_missing(application)
        prompts = " ".join(f"{i + 1}.) {SLOT_TITLES[f]}" for i, f in enumerate(missing))
        return TurnResult(
            reply=f"Perfect. To finish the application I'll need a few more details: {prompts} "
            "Once I have this, we can finalize the decision.",
            next_state="slot_fill",
            metadata={"application": application},
        )

    if state == "slot_fill" and ctx.frame.intent == "provide_application_fields":
        for fieldname in LOAN_SLOT_FIELDS:
            if fieldname in ctx.frame.slots:
                application[fieldname] = ctx.frame.slots[fieldname]
        missing = _loan_missing(application)
        if missing:
            prompts = " ".join(f"{i + 1}.) {SLOT_TITLES[f]}" for i, f in enumerate(missing))
            return TurnResult(
                reply=f"Thanks — I still need: {prompts}",
                next_state="slot_fill",
                metadata={"application": application},
            )
        recap = (
            f"Dependents: {application['Dependents']:g}; Co-applicant Income: {application['CoapplicantIncome']:g}; "
            f"LoanAmount: {application['LoanAmount']:g}; LoanTerm: {application['LoanTerm']:g} months"
        )
        return TurnResult(
            reply=f"Thanks; I've recorded the following — {recap}. Please confirm these details so I "
            "can run the automated credit-risk assessment.",
            next_state="details_confirm",
            metadata={"application": application},
        )

    if state == "details_confirm":
        return TurnResult(
            reply="Great. Before disbursing the funds, could you confirm that you accept the loan "
            "proposal under the terms we just reviewed?",
            next_state="terms",
        )

    if state == "terms" and ctx.frame.intent == "confirm_terms":
        production = services.catalog.production_version("getLoanDecision")
        if production is None:
            return TurnResult(reply="No decision model is currently in production.", task_action="fail")
        arguments = {f: application.get(f) for f in production.feature_list}
        absent = [f for f, v in arguments.items() if v is None]
        if absent:
            prompts = "; ".join(absent)
            return TurnResult(reply=f"I still need: {prompts}", next_state="slot_fill")
        result = ctx.invoke("getLoanDecision", arguments)
        ctx.note("last_decision", result.get("decision_id"))
        notice = {
            "kind": "decision-notice",
            "decision_id": result.get("decision_id"),
            "outcome": result.get("outcome"),
            "model_version": result.get("model_version"),
            "features_used": production.feature_list,
            "explanation": result.get("explanation"),
        }
        if result.get("outcome") == "approved":
            reply = (
                "Excellent! Your application has been approved by our automated decision system. "
                "The funds will reach your account shortly. Your loan reference number is "
                f"{result.get('decision_id')} for future enquiries. If you need anything else, just let me know."
            )
        else:
            reply = (
                "I'm sorry — the automated decision system declined this application. "
                f"Your reference number is {result.get('decision_id')}. {result.get('explanation')}"
            )
        return TurnResult(reply=reply, task_action="complete", data=result, artifact=notice)

    raise HadaError("unintelligible", f"unexpected turn in loan flow (state {state!r})")


def _customer_complaint(ctx: TurnContext) -> TurnResult:
    services = ctx.services
    state = ctx.state
    attribute = ctx.metadata.get("complaint_attribute") or ctx.frame.slots.get("attribute") or "ZIP_Code"

    if state in (None, "start"):
        return TurnResult(
            reply=(
                "Thank you for contacting us and for highlighting this issue. I understand your "
                f"concern — {attribute} can indeed correlate with socio-economic status. It is "
                "occasionally used in credit-risk models because regional default patterns can be "
                "predictive, but we recognise the possibility of unintended bias."
            ),
            next_state="complaint_discuss",
            metadata={"complaint_attribute": attribute},
        )
    if state == "complaint_discuss":
        watchlist = sorted(services.catalog.active_watchlist())
        named = [a for a in ("Gender", "Religion", "Age", "Ethnic_Origin") if a in watchlist]
        others = len(watchlist) - len(named)
        return TurnResult(
            reply=(
                "Our bank maintains a catalogue of attributes that require heightened ethical "
                f"scrutiny. At present it covers items such as {', '.join(named)}, and {others} "
                "other sensitive features. We continuously review this list to prevent "
                "discriminatory outcomes."
            ),
            next_state="complaint_catalogue",
        )
    if state == "complaint_catalogue":
        flagged = attribute in services.catalog.active_watchlist()
        if flagged:
            reply = f"{attribute} is already flagged in the catalogue, so its use triggers an ethics review."
        else:
            reply = (
                f"Currently, {attribute} is not flagged in the catalogue. In light of your feedback, "
                "I will submit a recommendation to the Ethics Oversight Committee for formal review."
            )
        return TurnResult(reply=reply, next_state="complaint_escalate", metadata={"complaint_already_flagged": flagged})
    if state == "complaint_escalate":
        trigger = services.ethics.raise_trigger(
            cause="customer-complaint",
            subject_attribute=attribute,
            source=ctx.task_id,
            raised_by="customer",
            detail=f"Customer challenged the use of {attribute} in loan decisions (task {ctx.task_id}).",
        )
        ctx.note("last_complaint_ticket", trigger.resulting_ticket)
        return TurnResult(
            reply=(
                f"Thank you for bringing this to our attention. I've opened ethics ticket "
                f"{trigger.resulting_ticket} and escalated it to the Ethics Oversight Committee. "
                "You will receive an update once a decision is reached."
            ),
            task_action="complete",
            data={"ticket_id": trigger.resulting_ticket, "trigger_id": trigger.trigger_id},
        )
    raise HadaError("unintelligible", f"unexpected turn in complaint flow (state {state!r})")


def customer_policy(ctx: TurnContext) -> TurnResult:
    if ctx.frame.intent == "file_complaint" or (ctx.state or "").startswith("complaint_"):
        return _customer_complaint(ctx)
    if ctx.frame.intent == "status_query" and not ctx.state:
        return _status_reply(ctx)
    return _customer_loan(ctx)


# -- business manager ---------------------------------------------------------------


def bm_policy(ctx: TurnContext) -> TurnResult:
    services = ctx.services
    frame = ctx.frame

    if frame.intent == "set_kpi_target":
        metric = frame.slots.get("metric", "expected-loss")
        goal = "minimize" if metric == "expected-loss" else "maximize"
        statement = (
            "Minimise credit risk (expected loss) for short-term loan decisions"
            if metric == "expected-loss"
            else "Grow the short-term loan book through new-customer acquisition"
        )
        objective = services.catalog.set_objective(
            horizon="quarterly",
            statement=statement,
            key_results=[{"kr_id": "kr1", "metric": metric, "direction": goal, "target": 0.9}],
            owner_role="business-manager",
            actor="business-manager",
        )
        services.catalog.bind_kpi("getLoanDecision", objective.objective_id, metric, 1.0, "business-manager")
        ticket = services.catalog.list_tickets(kind="model-development")[-1]
        ctx.note("last_target_ticket", ticket.ticket_id)
        goal_text = "credit-risk minimization" if metric == "expected-loss" else "new-customer acquisition"
        return TurnResult(
            reply=(
                f"Understood. The objective has been switched to {goal_text}. I have opened ticket "
                f"{ticket.ticket_id} for the Data Science team to develop and validate a new version "
                "of the AI model that aligns with this updated goal."
            ),
            next_state="kpi_set",
            data={"ticket_id": ticket.ticket_id, "objective_id": objective.objective_id},
        )

    if frame.intent == "approve_deployment":
        waiting = [
            t for t in services.catalog.list_tickets(state="awaiting-approval", kind="deployment")
        ]
        version = frame.slots.get("version")
        if version:
            waiting = [t for t in waiting if t.links and t.links[0].endswith(f"@{version}")]
        if not waiting:
            return TurnResult(
                reply="There is no deployment ticket awaiting approval that matches that request.",
                task_action="fail",
            )
        ticket = waiting[0]
        tool_id, _, version = ticket.links[0].partition("@")
        decision = frame.slots.get("decision", "approve")
        record = services.catalog.approve_deployment(ticket.ticket_id, decision, "business-manager")
        if decision == "approve":
            reply = (
                f"Understood. Version {record.version} is now queued for deployment; ticket "
                f"{ticket.ticket_id} has been updated to “Approved—Deploying”. "
                "You will receive confirmation once the rollout is complete."
            )
        else:
            reply = (
                f"Noted. Version {record.version} has been rejected and deprecated; ticket "
                f"{ticket.ticket_id} is closed as rejected."
            )
        return TurnResult(
            reply=reply,
            task_action="complete",
            data={"ticket_id": ticket.ticket_id, "version": record.version, "decision": decision},
        )

    if frame.intent == "status_query":
        if ctx.state == "kpi_set":
            return TurnResult(
                reply="Will do. You will receive automatic status updates from the ticket as milestones are reached.",
                task_action="complete",
            )
        return _status_reply(ctx)

    raise HadaError("unintelligible", "the business-manager agent cannot act on that request")


# -- data scientist ---------------------------------------------------------------


def _next_version(services: "Services") -> str:
    versions = services.catalog.list_versions("getLoanDecision")
    minors = [int(v.version.split(".")[1]) for v in versions if v.version.startswith("1.")]
    return f"1.{max(minors) + 1}" if minors else "1.0"


def ds_policy(ctx: TurnContext) -> TurnResult:
    services = ctx.services
    frame = ctx.frame

    if frame.intent == "register_version" and frame.slots.get("stage") == "annotate":
        ops_ticket = ctx.metadata.get("ops_ticket") or (ctx.profile.memory.recall(ctx.profile.agent_id, "last_ops_ticket") if ctx.profile.memory else None)
        if not ops_ticket:
            return TurnResult(reply="There is no open deployment ticket to annotate.", task_action="fail")
        services.catalog.annotate_ticket(ops_ticket, frame.source_text, "data-scientist")
        return TurnResult(
            reply=(
                "Noted. The justification has been included in the notification. You will receive "
                "confirmation as soon as the Business Manager approves or requests changes."
            ),
            task_action="complete",
        )

    if frame.intent in ("register_version", "request_retrain"):
        exclude: list[str] = []
        dev_tickets = [
            t
            for t in services.catalog.list_tickets(kind="model-development")
            if t.state in ("open", "in-progress")
        ]
        for ticket in dev_tickets:
            for link in ticket.links:
                if link.startswith("watchlist:"):
                    exclude.append(link.split(":", 1)[1])
        if frame.slots.get("exclude"):
            exclude.append(frame.slots["exclude"])
        exclude = sorted(set(exclude))
        version = frame.slots.get("version") or _next_version(services)
        arguments: dict[str, Any] = {"version": version}
        if exclude:
            arguments["exclude"] = ",".join(exclude)
        from ..loan.engine import FIXTURE_TREES

        if version in FIXTURE_TREES:
            arguments["fixture"] = version
        result = ctx.invoke("trainLoanModel", arguments)
        ops = [t for t in services.catalog.list_tickets(kind="deployment") if t.links and t.links[0].endswith(f"@{version}")]
        ops_ticket = ops[-1].ticket_id if ops else None
        for ticket in dev_tickets:
            if ticket.state == "open":
                services.catalog.ticket_transition(
                    ticket.ticket_id, "in-progress", "data-scientist", f"version {version} in validation"
                )
        ctx.note("last_ops_ticket", ops_ticket)
        loss = result.get("expected_loss_proxy")
        loss_text = f" Offline validation puts the expected-loss proxy at {loss:,.0f}." if loss is not None else ""
        excl_text = f" The feature set excludes {', '.join(exclude)}." if exclude else ""
        return TurnResult(
            reply=(
                f"Acknowledged. I opened ticket {ops_ticket} for deployment, tagged it as "
                "“Awaiting Business Approval”, and sent an approval request to the Business "
                f"Department Manager. You are copied on all ticket updates.{loss_text}{excl_text}"
            ),
            next_state="version_registered",
            data={"ops_ticket": ops_ticket, "version": version, **{k: v for k, v in result.items() if k != "feature_list"}},
            metadata={"ops_ticket": ops_ticket},
        )

    if frame.intent == "status_query":
        return _status_reply(ctx)

    raise HadaError("unintelligible", "the data-scientist agent cannot act on that request")


# -- chief credit officer ---------------------------------------------------------------


def cco_policy(ctx: TurnContext) -> TurnResult:
    services = ctx.services
    frame = ctx.frame
    if frame.intent == "set_okr":
        metric = frame.slots.get("metric", "expected-loss")
        direction = "minimize" if metric == "expected-loss" else "maximize"
        horizon = frame.slots.get("horizon", "quarterly")
        if horizon == "yearly":
            metric, direction = "portfolio-growth", "maximize"
            statement = "Grow the lending portfolio within the tightened risk appetite"
        elif metric == "expected-loss":
            statement = "Minimise credit losses across the lending portfolio"
        else:
            statement = "Acquire new lending customers across the portfolio"
        objective = services.catalog.set_objective(
            horizon=horizon,
            statement=statement,
            key_results=[{"kr_id": "kr1", "metric": metric, "direction": direction, "target": 0.9}],
            owner_role="cco",
            actor="cco",
        )
        previous = [o for o in services.catalog.list_objectives("superseded") if o.superseded_by == objective.objective_id]
        supersession = f" This supersedes: {previous[0].statement}." if previous else ""
        return TurnResult(
            reply=(
                f"The {objective.horizon} objective is now “{objective.statement}” "
                f"({objective.objective_id}).{supersession} All involved roles have been informed."
            ),
            task_action="complete",
            data={"objective_id": objective.objective_id},
        )
    if frame.intent == "status_query":
        return _status_reply(ctx)
    raise HadaError("unintelligible", "the CCO agent handles objective setting and status queries only")


# -- audit manager ---------------------------------------------------------------


def audit_policy(ctx: TurnContext) -> TurnResult:
    services = ctx.services
    frame = ctx.frame
    if frame.intent == "audit_decision":
        decision_id = frame.slots["decision_id"]
        record, proof = services.ledger.query_decision(decision_id)
        replay = services.engine.replay_decision(decision_id)
        pin = frame.slots.get("version")
        pin_text = ""
        if pin:
            # The lineage record holds only the features the deciding version
            # saw; a pinned version may need more, so widen from the
            # originating task's collected application when it is still known.
            vector = dict(record.feature_vector)
            source_task = record.customer_task_id
            if source_task and source_task in services.store:
                collected = services.store.get(source_task).metadata.get("application", {})
                vector = {**collected, **vector}
            try:
                pinned = services.engine.serve_decision(
                    pin, vector, "audit-manager", task_id=ctx.task_id, audit_pin=True
                )
                pin_text = (
                    f" Replayed against pinned version {pin}: outcome {pinned['outcome']} "
                    f"(recorded as an audit-replay ledger entry)."
                )
            except HadaError as exc:
                pin_text = (
                    f" Replay against pinned version {pin} is not possible from the recorded "
                    f"lineage: {exc.message}."
                )
        ctx.note("last_audited_decision", decision_id)
        steps = "; ".join(
            f"{s['feature']} {s['comparator']} {s['threshold']} -> {s['branch']}" for s in record.decision_path
        )
        consistency = "consistent" if replay["consistent"] else "INCONSISTENT"
        return TurnResult(
            reply=(
                f"Decision {decision_id}: outcome {record.outcome} by model version "
                f"{record.model_version}. Path: {steps}. Features: "
                f"{', '.join(sorted(record.feature_vector))}. Ledger inclusion indices {proof}; "
                f"path replay on the stored tree is {consistency}.{pin_text}"
            ),
            task_action="complete",
            data={"decision_id": decision_id, "inclusion_proof": proof, "model_version": record.model_version},
        )
    if frame.intent == "status_query":
        return _status_reply(ctx)
    raise HadaError("unintelligible", "the audit agent answers decision-audit requests only")


# -- value & ethics manager ---------------------------------------------------------------


def ethics_policy(ctx: TurnContext) -> TurnResult:
    services = ctx.services
    frame = ctx.frame

    if frame.intent == "resolve_ethics":
        raised = services.catalog.list_triggers(state="raised")
        if frame.slots.get("dismiss") and frame.slots.get("all"):
            attribute = frame.slots.get("attribute")
            targets = [
                t for t in raised
                if t.cause == "watchlist-hit" and (attribute is None or t.subject_attribute == attribute)
            ]
            if not targets:
                return TurnResult(reply="There are no open watchlist-hit triggers to dismiss.", task_action="fail")
            for trigger in targets:
                services.ethics.resolve_trigger(trigger.trigger_id, {"dismiss": True}, "value-ethics-manager")
            label = f" for {attribute}" if attribute else ""
            return TurnResult(
                reply=(
                    f"Dismissed {len(targets)} open watchlist-hit trigger(s){label}; "
                    "no catalogue changes were made and the linked ethics tickets are closed."
                ),
                next_state="ethics_resolved",
                data={"dismissed": [t.trigger_id for t in targets]},
            )
        trigger_id = ctx.metadata.get("trigger_id") or (raised[-1].trigger_id if raised else None)
        if trigger_id is None:
            return TurnResult(reply="There are no open ethics triggers to act on.", task_action="fail")
        trigger = services.catalog.get_trigger(trigger_id)
        attribute = trigger.subject_attribute or "the contested attribute"
        if frame.slots.get("stage") == "consult":
            production = services.catalog.production_version("getLoanDecision")
            uses = production is not None and trigger.subject_attribute in (production.feature_list or [])
            second = (
                f"Second, we should exclude {attribute} from the feature set of the current "
                "loan-decision model to prevent inadvertent discrimination."
                if uses
                else f"Second, no production model currently uses {attribute}, so a retraining mandate is precautionary."
            )
            return TurnResult(
                reply=(
                    f"I propose two actions. First, let's flag {attribute} in our metadata catalogue as "
                    f"Sensitive so that any future use triggers an ethics review. {second} Shall I proceed?"
                ),
                next_state="ethics_proposal",
                metadata={"trigger_id": trigger_id},
            )
        resolution = {
            "flag_attribute": attribute if frame.slots.get("flag") else None,
            "retrain": frame.slots.get("retrain", False),
            "dismiss": frame.slots.get("dismiss", False),
        }
        services.ethics.resolve_trigger(trigger_id, resolution, "value-ethics-manager")
        retrains = [
            t.ticket_id
            for t in services.catalog.list_tickets(kind="model-development")
            if any(link == f"watchlist:{attribute}" for link in t.links)
        ]
        if resolution["dismiss"]:
            reply = f"The trigger has been dismissed; no catalogue changes were made. Ticket {trigger.resulting_ticket} is closed."
        else:
            retrain_text = (
                f"(2) submitted ticket {retrains[-1]} to the Data Science team to retrain the "
                "underwriting model without that feature"
                if retrains
                else "(2) recorded that no production model requires retraining"
            )
            reply = (
                f"Understood. I will (1) update the watchlist to include {attribute}, and "
                f"{retrain_text}. All changes are logged on the decision ledger and the relevant "
                "teams have been notified."
            )
        return TurnResult(
            reply=reply,
            next_state="ethics_resolved",
            data={"trigger_id": trigger_id, "retrain_tickets": retrains},
        )

    if frame.intent == "flag_attribute":
        attribute = frame.slots["attribute"]
        services.catalog.flag_attribute(attribute, frame.source_text, "value-ethics-manager")
        return TurnResult(
            reply=f"{attribute} is now on the sensitive-values watchlist; any future use triggers an ethics review.",
            task_action="complete",
            data={"attribute": attribute},
        )

    if frame.intent == "status_query":
        if ctx.state == "ethics_resolved":
            return TurnResult(
                reply=(
                    "Will do. Expect the first status update within two business days after the "
                    "retraining job is complete."
                ),
                task_action="complete",
            )
        return _status_reply(ctx)

    raise HadaError("unintelligible", "the ethics agent handles triggers, watchlist changes, and status queries")


# -- shared ---------------------------------------------------------------


def _status_reply(ctx: TurnContext) -> TurnResult:
    services = ctx.services
    role = ctx.profile.role
    tickets = [
        t
        for t in services.catalog.list_tickets()
        if role in (t.assigned_role, t.raised_by) and t.state not in ("done", "rejected")
    ]
    pending = services.controller_view.pending_notifications(role) if services.controller_view else []
    production = services.catalog.production_version("getLoanDecision")
    lines = [
        f"Open items for {_display(role)}: "
        f"{', '.join(t.ticket_id + ' (' + t.state + ')' for t in tickets) if tickets else 'no open tickets'}."
    ]
    if pending:
        lines.append(f"You have {len(pending)} unread notification(s).")
    if production is not None:
        lines.append(f"Production decision model: version {production.version}.")
    return TurnResult(reply=" ".join(lines), task_action="complete")


POLICIES = {
    "customer": customer_policy,
    "business-manager": bm_policy,
    "data-scientist": ds_policy,
    "cco": cco_policy,
    "audit-manager": audit_policy,
    "value-ethics-manager": ethics_policy,
}
