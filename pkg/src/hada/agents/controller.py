"""Supervisor controller: intent dispatch, role resolution, policy enforcement.

Every stakeholder utterance arrives here as a task turn. The controller
resolves the intent (scripted grammar by default, an LLM provider if one is
configured), checks the speaker's duty-matrix involvement for that intent,
routes the turn to the speaker's interaction agent, and discharges
consulted/informed duties as notification tasks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

from ..a2a.model import Message, Part, Task, TaskState, Trigger
from ..a2a.registry import AgentRegistry
from ..a2a.store import TaskStore
from ..catalog import Catalog
from ..errors import HadaError, NotFound
from ..ethics import EthicsEngine
from ..ledger import Ledger
from ..policy import ROLE_NAMES, PolicyService
from ..toolbus import ToolBus
from .crm import CrmStore
from .intents import IntentFrame, resolve_intent
from .llm import LlmIntentResolver
from .policies import POLICIES, TurnContext, TurnResult
from .profiles import AgentProfile, role_agent_id

log = logging.getLogger(__name__)

CONTROLLER_ID = "hada-controller"

# intent -> (governing activity, duty letters that may initiate it).
# ``None`` means the intent is open to any authenticated role (complaints and
# read-only status queries); the handling flow still runs under its own
# activity checks.
INTENT_ACCESS: dict[str, tuple[str | None, frozenset[str] | None]] = {
    "set_okr": ("set-quarterly-targets", frozenset({"R", "A"})),
    "set_kpi_target": ("set-optimization-target", frozenset({"R", "A"})),
    "request_retrain": ("optimize-ai-tools", frozenset({"R", "A"})),
    "register_version": ("optimize-ai-tools", frozenset({"R", "A"})),
    "approve_deployment": ("approve-deployment", frozenset({"R", "A"})),
    "apply_loan": ("individual-loan-decision", frozenset({"R", "A", "C"})),
    "provide_application_fields": ("individual-loan-decision", frozenset({"R", "A", "C"})),
    "confirm_terms": ("individual-loan-decision", frozenset({"R", "A", "C"})),
    "file_complaint": (None, None),
    "audit_decision": ("audit-decision", frozenset({"R", "A"})),
    "flag_attribute": ("handle-ethics-concern", frozenset({"R", "A"})),
    "resolve_ethics": ("handle-ethics-concern", frozenset({"R", "A"})),
    "status_query": (None, None),
}


@dataclass
class Services:
    """Shared component references handed to dialog policies."""

    clock: Any
    ids: Any
    ledger: Ledger
    catalog: Catalog
    policy: PolicyService
    ethics: EthicsEngine
    bus: ToolBus
    engine: Any
    crm: CrmStore
    store: TaskStore
    registry: AgentRegistry
    profiles: dict[str, AgentProfile]
    runtime_config: dict[str, Any] = field(default_factory=dict)
    controller_view: Any = None  # set to the Controller after construction


class Controller:
    def __init__(self, services: Services, llm_resolver: LlmIntentResolver | None = None) -> None:
        self.services = services
        self._llm = llm_resolver
        services.controller_view = self

    # -- notifications -----------------------------------------------------

    def notify(
        self,
        activity: str,
        actor: str,
        summary: str,
        refs: dict[str, Any],
        consulted: list[str],
        informed: list[str],
    ) -> None:
        """Catalog notifier hook: one pending task per duty-holding role."""
        for duty, roles in (("consult", consulted), ("inform", informed)):
            for role in roles:
                agent_role = "controller" if role == "hada" else role
                if agent_role not in self.services.profiles:
                    continue
                message = Message(
                    role="user",
                    parts=[
                        Part.text_part(f"[{duty}] {summary}"),
                        Part.data_part(
                            {"activity": activity, "actor": actor, "duty": duty, "refs": refs, "summary": summary}
                        ),
                    ],
                )
                task = self.services.store.send_task(CONTROLLER_ID, role_agent_id(agent_role), message)
                self.services.store.update_metadata(task.task_id, {"kind": "notification", "duty": duty, "role": role})

    def pending_notifications(self, role: str) -> list[Task]:
        agent_role = "controller" if role == "hada" else role
        tasks = self.services.store.list_tasks(server_agent=role_agent_id(agent_role))
        return [
            t for t in tasks if t.metadata.get("kind") == "notification" and t.state == TaskState.SUBMITTED
        ]

    def acknowledge_notification(self, task_id: str) -> Task:
        store = self.services.store
        store.transition(task_id, Trigger.START)
        return store.transition(task_id, Trigger.COMPLETE)

    # -- dispatch ------------------------------------------------------------

    def _resolve(self, text: str, role: str, state: str | None) -> IntentFrame:
        if self._llm is not None:
            frame = self._llm.resolve(text, role, state)
            if frame is not None:
                return frame
        return resolve_intent(text, role, state)

    def _reply(self, task_id: str, text: str, data: dict[str, Any] | None = None) -> None:
        parts = [Part.text_part(text)]
        if data is not None:
            parts.append(Part.data_part(data))
        self.services.store.add_message(task_id, Message(role="agent", parts=parts))

    def handle_utterance(
        self,
        role: str,
        text: str,
        task_id: str | None = None,
        customer_id: str | None = None,
    ) -> tuple[Task, str]:
        """One conversation turn: user message in, agent message out."""
        store = self.services.store
        if role not in self.services.profiles:
            raise NotFound("no-capable-agent", role)
        speaker_agent = role_agent_id(role)
        message = Message.user_text(text)
        if task_id is None:
            task = store.send_task(speaker_agent, CONTROLLER_ID, message)
            task_id = task.task_id
        else:
            store.add_message(task_id, message)
            task = store.get(task_id)

        if task.state == TaskState.SUBMITTED:
            store.transition(task_id, Trigger.START)
        elif task.state == TaskState.INPUT_REQUIRED:
            store.transition(task_id, Trigger.RESUME)

        state = store.get(task_id).metadata.get("dialog_state")
        try:
            frame = self._resolve(text, role, state)
        except HadaError as exc:
            if exc.code != "unintelligible":
                raise
            reply = "I could not map that request to anything I can do. Could you rephrase it?"
            self._reply(task_id, reply)
            store.transition(task_id, Trigger.REQUIRE_INPUT)
            return store.get(task_id), reply

        activity, involvement = INTENT_ACCESS.get(frame.intent, (None, None))
        if activity is not None and involvement is not None:
            auth = self.services.policy.authorize(role, activity)
            if not (auth.assignment & involvement):
                accountable = auth.accountable or "unassigned"
                reply = (
                    f"I can't action that. Role '{role}' holds no performing duty for "
                    f"'{activity}'; the accountable role is {ROLE_NAMES.get(accountable, accountable)} "
                    f"({accountable})."
                )
                self._reply(task_id, reply, data={"error": "policy-denied", "accountable": accountable})
                store.transition(task_id, Trigger.FAIL)
                return store.get(task_id), reply

        missing = frame.missing_slots()
        if missing:
            reply = f"I need a little more to proceed: {', '.join(missing)}."
            self._reply(task_id, reply, data={"missing_slots": missing})
            store.transition(task_id, Trigger.REQUIRE_INPUT)
            return store.get(task_id), reply

        profile = self.services.profiles[role]
        result = self.run_agent_turn(profile, task_id, frame, state, customer_id)
        return store.get(task_id), result.reply

    def run_agent_turn(
        self,
        profile: AgentProfile,
        task_id: str,
        frame: IntentFrame,
        state: str | None,
        customer_id: str | None,
    ) -> TurnResult:
        store = self.services.store
        policy_fn = POLICIES.get(profile.role)
        if policy_fn is None:
            raise NotFound("no-capable-agent", profile.role)
        metadata = store.get(task_id).metadata
        ctx = TurnContext(
            services=self.services,
            profile=profile,
            task_id=task_id,
            frame=frame,
            state=state,
            metadata=metadata,
            customer_id=customer_id or metadata.get("customer_id"),
        )
        try:
            result = policy_fn(ctx)
        except HadaError as exc:
            if exc.code == "unintelligible":
                reply = "I could not act on that in the current context. Could you rephrase?"
                self._reply(task_id, reply)
                store.transition(task_id, Trigger.REQUIRE_INPUT)
                return TurnResult(reply=reply, task_action="input-required")
            reply = f"That request failed: {exc.message}"
            self._reply(task_id, reply, data=exc.to_dict())
            store.transition(task_id, Trigger.FAIL)
            return TurnResult(reply=reply, task_action="fail")

        updates = dict(result.metadata)
        if customer_id:
            updates.setdefault("customer_id", customer_id)
        if result.next_state is not None:
            updates["dialog_state"] = result.next_state
        if updates:
            store.update_metadata(task_id, updates)
        self._reply(task_id, result.reply, data=result.data)
        if result.artifact is not None:
            store.add_artifact(task_id, [Part.data_part(result.artifact)])
        if result.task_action == "complete":
            store.transition(task_id, Trigger.COMPLETE)
        elif result.task_action == "fail":
            store.transition(task_id, Trigger.FAIL)
        else:
            store.transition(task_id, Trigger.REQUIRE_INPUT)
        return result
