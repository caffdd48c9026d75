"""HTTP front door: every module's endpoints mounted on one FastAPI app.

Auth is a bearer token resolved to a role; every mutating route requires it.
Task event streams go out as server-sent events with the event id set to the
sequence number, so clients resume with Last-Event-ID.
"""

from __future__ import annotations

import json
from typing import Any

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from .. import __version__
from ..a2a.model import Message, Part, TaskState
from ..agents.profiles import role_agent_id
from ..errors import HadaError
from .auth import TokenInfo
from .runtime import Runtime

STATUS_BY_CODE = {
    "unknown-token": 401,
    "expired-token": 401,
    "unauthenticated-client": 401,
    "policy-denied": 403,
    "tool-denied": 403,
    "unknown-task": 404,
    "unknown-server-agent": 404,
    "unknown-tool": 404,
    "unknown-ticket": 404,
    "unknown-decision": 404,
    "unknown-model": 404,
    "unknown-objective": 404,
    "unknown-customer": 404,
    "unknown-trigger": 404,
    "unknown-activity": 404,
    "unknown-source": 404,
    "no-capable-agent": 404,
    "not-in-production": 404,
    "duplicate-agent-id": 409,
    "duplicate-tool-id": 409,
    "duplicate-version": 409,
    "duplicate-active-entry": 409,
    "illegal-transition": 409,
    "illegal-ticket-transition": 409,
    "task-terminal": 409,
    "ticket-wrong-state": 409,
    "watchlist-violation": 409,
    "downstream-unavailable": 502,
    "storage-failure": 500,
    "corrupt-ledger": 500,
}


def build_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(title="hada", version=__version__)
    app.state.runtime = runtime
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["*"],
    )

    @app.exception_handler(HadaError)
    async def hada_error_handler(_request: Request, exc: HadaError) -> JSONResponse:
        return JSONResponse(status_code=STATUS_BY_CODE.get(exc.code, 400), content=exc.to_dict())

    def actor(authorization: str | None = Header(default=None)) -> TokenInfo:
        token = None
        if authorization and authorization.lower().startswith("bearer "):
            token = authorization[7:].strip()
        return runtime.tokens.authenticate(token)

    # -- service meta ------------------------------------------------------

    @app.get("/healthz")
    def healthz() -> dict[str, Any]:
        return {
            "status": "ok",
            "ledger_entries": len(runtime.ledger),
            "agents": len(runtime.registry),
            "tools": len(runtime.bus.list_tools()),
        }

    @app.get("/version")
    def version() -> dict[str, str]:
        return {"version": __version__}

    # -- agent cards ------------------------------------------------------

    @app.get("/.well-known/agent.json")
    def controller_card() -> dict[str, Any]:
        return runtime.profiles["controller"].card.to_dict()

    @app.get("/agents/{role}/card.json")
    def agent_card(role: str) -> dict[str, Any]:
        profile = runtime.profiles.get(role)
        if profile is None:
            raise HadaError("unknown-server-agent", f"no agent for role '{role}'")
        return profile.card.to_dict()

    @app.get("/agents")
    def list_agents(capability: str | None = None) -> list[dict[str, Any]]:
        cards = (
            runtime.registry.by_capability(capability) if capability else runtime.registry.list_cards()
        )
        return [c.to_dict() for c in cards]

    # -- conversations (a2a) ------------------------------------------------------

    def _send(body: dict[str, Any], info: TokenInfo) -> Any:
        text = body.get("text")
        message = body.get("message")
        if text is None and message:
            parts = message.get("parts") or []
            text = "\n".join(p.get("text", "") for p in parts if p.get("kind") == "text").strip()
        if not text:
            raise HadaError("invalid-message", "no text content in message")
        task, reply = runtime.controller.handle_utterance(
            info.role, text, task_id=body.get("task_id"), customer_id=info.customer_id
        )
        return task, reply

    @app.post("/a2a/tasks/send")
    def tasks_send(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        server = body.get("server_agent", "hada-controller")
        if server != "hada-controller":
            message = Message(
                role="user",
                parts=[Part.from_dict(p) for p in (body.get("message", {}).get("parts") or [])],
            )
            task = runtime.store.send_task(role_agent_id(info.role), server, message)
            return {"task": task.to_dict()}
        task, reply = _send(body, info)
        return {"task": task.to_dict(), "reply": reply}

    def _sse_stream(task_id: str, from_sequence: int):
        def generate():
            for event in runtime.store.subscribe(task_id, from_sequence=from_sequence, timeout=30.0):
                payload = json.dumps(event.to_dict())
                yield f"id: {event.sequence_no}\nevent: {event.kind}\ndata: {payload}\n\n"

        return StreamingResponse(
            generate(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    @app.post("/a2a/tasks/sendSubscribe")
    def tasks_send_subscribe(
        body: dict[str, Any],
        info: TokenInfo = Depends(actor),
        last_event_id: str | None = Header(default=None),
    ) -> StreamingResponse:
        task, _reply = _send(body, info)
        resume = int(last_event_id) if last_event_id and last_event_id.isdigit() else 0
        return _sse_stream(task.task_id, resume)

    @app.get("/a2a/tasks/subscribe")
    def tasks_subscribe(
        id: str,
        info: TokenInfo = Depends(actor),
        last_event_id: str | None = Header(default=None),
    ) -> StreamingResponse:
        resume = int(last_event_id) if last_event_id and last_event_id.isdigit() else 0
        return _sse_stream(id, resume)

    @app.get("/a2a/tasks/get")
    def tasks_get(id: str, info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        task = runtime.store.get(id)
        return {"task": task.to_dict(), "events": [e.to_dict() for e in runtime.store.events(id)]}

    @app.get("/a2a/tasks")
    def tasks_list(
        info: TokenInfo = Depends(actor),
        server_agent: str | None = None,
        client_agent: str | None = None,
        mine: bool = False,
    ) -> list[dict[str, Any]]:
        if mine:
            client_agent = role_agent_id(info.role)
        tasks = runtime.store.list_tasks(server_agent=server_agent, client_agent=client_agent)
        return [t.to_dict() for t in tasks]

    @app.post("/a2a/tasks/cancel")
    def tasks_cancel(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        task = runtime.store.cancel(body["task_id"])
        return {"task": task.to_dict()}

    @app.post("/a2a/tasks/pushNotification/set")
    def tasks_push_set(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        return runtime.store.set_push_notification(body["task_id"], body["webhook"])

    @app.get("/notifications")
    def notifications(info: TokenInfo = Depends(actor)) -> list[dict[str, Any]]:
        return [t.to_dict() for t in runtime.controller.pending_notifications(info.role)]

    @app.post("/notifications/{task_id}/ack")
    def acknowledge(task_id: str, info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        return runtime.controller.acknowledge_notification(task_id).to_dict()

    @app.post("/agents/{role}/a2a/tasks/send")
    def agent_tasks_send(role: str, body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        message = Message(
            role="user",
            parts=[Part.from_dict(p) for p in (body.get("message", {}).get("parts") or [])]
            or [Part.text_part(body.get("text", ""))],
        )
        task = runtime.store.send_task(role_agent_id(info.role), role_agent_id(role), message)
        return {"task": task.to_dict()}

    # -- tool bus ------------------------------------------------------

    @app.post("/tools/register")
    def tools_register(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        if info.role not in ("hada", "data-scientist"):
            raise HadaError("policy-denied", f"role '{info.role}' may not register tools", accountable="hada")
        from ..toolbus import ToolManifest

        manifest = runtime.bus.register_tool(ToolManifest.from_dict(body))
        return manifest.to_dict()

    @app.get("/tools")
    def tools_list(filter: str | None = Query(default=None)) -> list[dict[str, Any]]:
        return [m.to_dict() for m in runtime.bus.list_tools(filter)]

    @app.post("/tools/{tool_id}/invoke")
    def tools_invoke(tool_id: str, body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        invocation = runtime.bus.invoke(
            tool_id, body.get("arguments") or {}, info.role, body.get("task_id", "")
        )
        return invocation.to_dict()

    # -- catalogues ------------------------------------------------------

    @app.get("/catalog/objectives")
    def objectives(status: str | None = None, info: TokenInfo = Depends(actor)) -> list[dict[str, Any]]:
        return [o.to_dict() for o in runtime.catalog.list_objectives(status)]

    @app.post("/catalog/objectives")
    def set_objective(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        objective = runtime.catalog.set_objective(
            horizon=body.get("horizon", "quarterly"),
            statement=body.get("statement", ""),
            key_results=body.get("key_results") or [],
            owner_role=body.get("owner_role", info.role),
            actor=info.role,
        )
        return objective.to_dict()

    @app.get("/catalog/kpi-bindings")
    def bindings(tool: str = "getLoanDecision", info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        active = runtime.catalog.active_bindings(tool)
        return {
            "bindings": [b.to_dict() for b in active],
            "effective_weights": runtime.catalog.effective_weights(tool),
        }

    @app.post("/catalog/kpi-bindings")
    def bind_kpi(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        binding = runtime.catalog.bind_kpi(
            body["tool_id"], body["objective_id"], body["kpi"], float(body["weight"]), info.role
        )
        return binding.to_dict()

    @app.get("/catalog/models")
    def models(tool: str | None = None, state: str | None = None, info: TokenInfo = Depends(actor)) -> list[dict[str, Any]]:
        return [v.to_dict(with_tree=False) for v in runtime.catalog.list_versions(tool, state)]

    @app.get("/catalog/models/{tool}/{version}")
    def model(tool: str, version: str, include_tree: bool = False, info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        return runtime.catalog.get_version(tool, version).to_dict(with_tree=include_tree)

    @app.post("/catalog/models")
    def register_model(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        record = runtime.catalog.register_version(
            body["tool_id"],
            body["version"],
            body.get("feature_list") or [],
            body.get("tree") or {},
            body.get("validation_metrics") or {},
            info.role,
        )
        return record.to_dict(with_tree=False)

    @app.get("/catalog/watchlist")
    def watchlist(info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        return {
            "active": sorted(runtime.catalog.active_watchlist()),
            "entries": [e.to_dict() for e in runtime.catalog.watchlist],
        }

    @app.post("/catalog/watchlist")
    def flag_attribute(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        entry = runtime.catalog.flag_attribute(
            body["attribute"], body.get("reason", ""), info.role, body.get("source_ticket")
        )
        return entry.to_dict()

    # -- tickets ------------------------------------------------------

    @app.get("/tickets")
    def tickets(state: str | None = None, kind: str | None = None, info: TokenInfo = Depends(actor)) -> list[dict[str, Any]]:
        return [t.to_dict() for t in runtime.catalog.list_tickets(state, kind)]

    @app.get("/tickets/{ticket_id}")
    def ticket(ticket_id: str, info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        return runtime.catalog.get_ticket(ticket_id).to_dict()

    @app.post("/tickets")
    def create_ticket(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        ticket = runtime.catalog.create_ticket(
            kind=body["kind"],
            subject=body.get("subject", ""),
            body=body.get("body", ""),
            raised_by=info.role,
            assigned_role=body.get("assigned_role", "data-scientist"),
            links=body.get("links") or [],
            actor="hada",
        )
        return ticket.to_dict()

    @app.post("/tickets/{ticket_id}/transition")
    def ticket_transition(ticket_id: str, body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        new_state = body["state"]
        record = runtime.catalog.get_ticket(ticket_id)
        if record.kind == "deployment" and new_state in ("approved", "rejected") and record.state == "awaiting-approval":
            decision = "approve" if new_state == "approved" else "reject"
            runtime.catalog.approve_deployment(ticket_id, decision, info.role, body.get("note", ""))
        else:
            runtime.catalog.ticket_transition(ticket_id, new_state, info.role, body.get("note", ""))
        return runtime.catalog.get_ticket(ticket_id).to_dict()

    # -- policy ------------------------------------------------------

    @app.get("/policy/matrix")
    def matrix(info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        return runtime.policy.matrix.to_dict()

    @app.post("/policy/authorize")
    def authorize(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        return runtime.policy.authorize(
            body.get("role", info.role), body["activity"], body.get("mode", "perform")
        ).to_dict()

    # -- ledger ------------------------------------------------------

    @app.get("/ledger/entries")
    def ledger_entries(
        info: TokenInfo = Depends(actor),
        from_: int = Query(default=0, alias="from"),
        to: int | None = Query(default=None),
    ) -> list[dict[str, Any]]:
        return [e.to_dict() for e in runtime.ledger.entries(from_, to)]

    def _may_view_decision(info: TokenInfo, record: Any) -> bool:
        if info.role in ("audit-manager", "hada"):
            return True
        if info.role == "customer":
            task_id = record.customer_task_id
            if task_id and task_id in runtime.store:
                return runtime.store.get(task_id).metadata.get("customer_id") == info.customer_id
        return False

    @app.get("/ledger/decisions/{decision_id}")
    def ledger_decision(decision_id: str, info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        record, proof = runtime.ledger.query_decision(decision_id)
        if not _may_view_decision(info, record):
            raise HadaError(
                "policy-denied",
                f"role '{info.role}' may not read decision {decision_id}",
                accountable="audit-manager",
            )
        return {"decision": record.to_dict(), "inclusion_proof": proof}

    @app.post("/ledger/verify")
    def ledger_verify(info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        return runtime.verify()

    @app.get("/ledger/export")
    def ledger_export(
        info: TokenInfo = Depends(actor),
        format: str = "json",
        decision: str | None = None,
    ) -> Any:
        if decision is not None:
            record, _ = runtime.ledger.query_decision(decision)
            if not _may_view_decision(info, record):
                raise HadaError(
                    "policy-denied",
                    f"role '{info.role}' may not export decision {decision}",
                    accountable="audit-manager",
                )
        if format == "text":
            return PlainTextResponse(runtime.ledger.export_text(decision))
        return JSONResponse(runtime.ledger.export_json(decision))

    # -- verbatim decision endpoint ------------------------------------------------------

    @app.post("/getLoanDecision/{model_id}")
    def get_loan_decision(model_id: str, body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        application = body.get("application", body)
        audit_pin = bool(body.get("audit_pin")) if isinstance(body, dict) else False
        task_id = body.get("task_id", "") if isinstance(body, dict) else ""
        result = runtime.engine.serve_decision(
            model_id,
            {k: v for k, v in application.items() if k not in ("audit_pin", "task_id")},
            info.role,
            task_id=task_id,
            audit_pin=audit_pin,
        )
        return result

    @app.post("/loan-engine/train")
    def loan_train(body: dict[str, Any], info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        arguments = {k: v for k, v in body.items() if k != "task_id"}
        invocation = runtime.bus.invoke("trainLoanModel", arguments, info.role, body.get("task_id", ""))
        return invocation.result or {}

    @app.get("/loan-engine/models/{version}/tree")
    def loan_tree(version: str, info: TokenInfo = Depends(actor)) -> dict[str, Any]:
        return runtime.catalog.get_version("getLoanDecision", version).tree

    return app
