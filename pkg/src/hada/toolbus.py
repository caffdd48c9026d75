"""Manifest-described tool bus.

Agents decide; tools act. Every tool publishes a manifest (id, endpoint,
five-kind input/output schemas, the governed activity it implements) and the
bus validates arguments, checks the caller's involvement in that activity,
dispatches to the endpoint, and records the invocation on the ledger.

Endpoints starting with ``local:`` dispatch to an in-process handler; ``http``
endpoints are POSTed to, which is how a tool server running as a separate
process is reached. Swapping the handler behind an endpoint changes nothing
about the caller-visible contract.

Sensitive-argument checks run at invocation time against the live watchlist:
if a watchlisted attribute arrives as an argument, the invocation record is
flagged and an ethics trigger is raised.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import HadaError, NotFound, PolicyDenied
from .ledger import Ledger
from .policy import PolicyService

SCHEMA_TYPES = ("string", "integer", "number", "boolean", "enum")

# Roles holding any of these letters on a tool's activity may invoke it:
# consulted roles participate in execution (a customer inside the
# loan-decision flow supplies data and consent), pure informed/absent roles
# may not act.
INVOKE_INVOLVEMENT = frozenset({"R", "A", "C"})

Handler = Callable[[dict[str, Any], "InvocationContext"], dict[str, Any]]


@dataclass
class InvocationContext:
    caller: str
    task_id: str
    tool_id: str


@dataclass
class ToolManifest:
    tool_id: str
    name: str
    description: str
    input_schema: dict[str, dict[str, Any]]
    output_schema: dict[str, dict[str, Any]]
    endpoint: str
    activity: str
    sensitive_inputs: list[str] = field(default_factory=list)
    version: str = "1.0.0"
    transport: str = "local"  # "local" | "http"; mirrors the endpoint scheme
    raci_mirror: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool_id": self.tool_id,
            "name": self.name,
            "description": self.description,
            "input_schema": self.input_schema,
            "output_schema": self.output_schema,
            "endpoint": self.endpoint,
            "activity": self.activity,
            "sensitive_inputs": list(self.sensitive_inputs),
            "version": self.version,
            "transport": self.transport,
            "raci_mirror": dict(self.raci_mirror),
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ToolManifest":
        return cls(
            tool_id=raw["tool_id"],
            name=raw.get("name", raw["tool_id"]),
            description=raw.get("description", ""),
            input_schema=raw.get("input_schema", {}),
            output_schema=raw.get("output_schema", {}),
            endpoint=raw.get("endpoint", ""),
            activity=raw.get("activity", ""),
            sensitive_inputs=list(raw.get("sensitive_inputs", [])),
            version=raw.get("version", "1.0.0"),
            transport=raw.get("transport", "local"),
            raci_mirror=dict(raw.get("raci_mirror", {})),
        )


@dataclass
class ToolInvocation:
    invocation_id: str
    tool_id: str
    arguments: dict[str, Any]
    caller: str
    task_id: str
    result: dict[str, Any] | None
    error: str | None
    latency_ms: float
    ethics_flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "invocation_id": self.invocation_id,
            "tool_id": self.tool_id,
            "arguments": self.arguments,
            "caller": self.caller,
            "task_id": self.task_id,
            "result": self.result,
            "error": self.error,
            "latency_ms": self.latency_ms,
            "ethics_flags": self.ethics_flags,
        }


def _check_field(name: str, spec: dict[str, Any], value: Any) -> None:
    kind = spec.get("type", "string")
    ok = True
    if kind == "string":
        ok = isinstance(value, str)
    elif kind == "integer":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == "number":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind == "boolean":
        ok = isinstance(value, bool)
    elif kind == "enum":
        ok = value in (spec.get("values") or [])
    if not ok:
        raise HadaError(
            "schema-violation",
            f"argument '{name}' violates schema ({kind}{': ' + str(spec.get('values')) if kind == 'enum' else ''})",
            field=name,
        )


def validate_schema_shape(schema: dict[str, Any], label: str) -> None:
    if not isinstance(schema, dict):
        raise HadaError("malformed-schema", f"{label} schema must be an object")
    for name, spec in schema.items():
        if not isinstance(spec, dict) or spec.get("type") not in SCHEMA_TYPES:
            raise HadaError("malformed-schema", f"{label} field '{name}' needs a type in {SCHEMA_TYPES}")
        if spec["type"] == "enum" and not spec.get("values"):
            raise HadaError("malformed-schema", f"{label} enum field '{name}' declares no values")


def validate_arguments(manifest: ToolManifest, arguments: dict[str, Any]) -> None:
    """Deterministic, order-independent validation against the input schema."""
    for name in sorted(arguments):
        if name not in manifest.input_schema:
            raise HadaError("schema-violation", f"argument '{name}' is not declared", field=name)
    for name in sorted(manifest.input_schema):
        spec = manifest.input_schema[name]
        if name not in arguments or arguments[name] is None:
            if spec.get("required"):
                raise HadaError("schema-violation", f"required argument '{name}' missing", field=name)
            continue
        _check_field(name, spec, arguments[name])


class ToolBus:
    def __init__(
        self,
        policy: PolicyService,
        ledger: Ledger,
        ids: Any,
        clock: Any,
        watchlist: Callable[[], set[str]] | None = None,
        ethics_hook: Callable[[str, str, str], None] | None = None,
        http_post: Callable[[str, dict[str, Any]], dict[str, Any]] | None = None,
    ) -> None:
        self._policy = policy
        self._ledger = ledger
        self._ids = ids
        self._clock = clock
        self._watchlist = watchlist or (lambda: set())
        # ethics_hook(attribute, invocation_id, caller) fires on watchlist hits
        self._ethics_hook = ethics_hook
        self._http_post = http_post or _default_http_post
        self._lock = threading.RLock()
        self._manifests: dict[str, ToolManifest] = {}
        self._order: list[str] = []
        self._handlers: dict[str, Handler] = {}
        self._invocations: dict[str, ToolInvocation] = {}

    # -- registration ------------------------------------------------------

    def register_tool(self, manifest: ToolManifest) -> ToolManifest:
        validate_schema_shape(manifest.input_schema, "input")
        validate_schema_shape(manifest.output_schema, "output")
        undeclared = sorted(set(manifest.sensitive_inputs) - set(manifest.input_schema))
        if undeclared:
            raise HadaError(
                "malformed-schema",
                f"sensitive_inputs not in input schema: {', '.join(undeclared)}",
            )
        if not manifest.activity:
            raise HadaError("malformed-schema", "manifest must name the activity it implements")
        # Read-only duty mirror so clients can see who may call without a
        # round trip to the policy endpoint.
        matrix = self._policy.matrix
        if manifest.activity in matrix.activities:
            manifest.raci_mirror = {
                role: "".join(sorted(duty))
                for role, duty in matrix.activities[manifest.activity].assignments.items()
            }
        with self._lock:
            if manifest.tool_id in self._manifests:
                raise HadaError("duplicate-tool-id", f"tool '{manifest.tool_id}' already registered")
            self._manifests[manifest.tool_id] = manifest
            self._order.append(manifest.tool_id)
        return manifest

    def bind_local(self, endpoint: str, handler: Handler) -> None:
        self._handlers[endpoint] = handler

    def __contains__(self, tool_id: str) -> bool:
        with self._lock:
            return tool_id in self._manifests

    def get_manifest(self, tool_id: str) -> ToolManifest:
        with self._lock:
            manifest = self._manifests.get(tool_id)
        if manifest is None:
            raise NotFound("unknown-tool", tool_id)
        return manifest

    def list_tools(self, capability_filter: str | None = None) -> list[ToolManifest]:
        with self._lock:
            manifests = [self._manifests[t] for t in self._order]
        if capability_filter:
            needle = capability_filter.lower()
            manifests = [
                m for m in manifests if needle in m.name.lower() or needle in m.description.lower()
            ]
        return manifests

    # -- invocation ------------------------------------------------------

    def invoke(self, tool_id: str, arguments: dict[str, Any], caller: str, task_id: str) -> ToolInvocation:
        manifest = self.get_manifest(tool_id)
        validate_arguments(manifest, arguments)
        auth = self._policy.authorize(caller, manifest.activity)
        if not (auth.assignment & INVOKE_INVOLVEMENT):
            raise PolicyDenied(caller, manifest.activity, auth.accountable)

        flags = sorted(set(arguments) & self._watchlist())
        invocation_id = self._ids.next("INV")
        started = time.perf_counter()
        result: dict[str, Any] | None = None
        error: str | None = None
        try:
            if manifest.endpoint.startswith("local:"):
                handler = self._handlers.get(manifest.endpoint)
                if handler is None:
                    raise HadaError("downstream-unavailable", f"no handler bound for {manifest.endpoint}")
                result = handler(arguments, InvocationContext(caller, task_id, tool_id))
            else:
                result = self._http_post(manifest.endpoint, arguments)
        except HadaError:
            raise
        except Exception as exc:  # noqa: BLE001 - downstream failure, not ours
            raise HadaError("downstream-unavailable", f"tool server failed: {exc}") from exc
        finally:
            latency_ms = (time.perf_counter() - started) * 1000.0

        for name in sorted(manifest.output_schema):
            spec = manifest.output_schema[name]
            if result is not None and name in result and result[name] is not None:
                _check_field(name, spec, result[name])

        invocation = ToolInvocation(
            invocation_id=invocation_id,
            tool_id=tool_id,
            arguments=arguments,
            caller=caller,
            task_id=task_id,
            result=result,
            error=error,
            latency_ms=round(latency_ms, 3),
            ethics_flags=flags,
        )
        with self._lock:
            self._invocations[invocation_id] = invocation
        self._ledger.append("invocation", invocation.to_dict())
        if flags and self._ethics_hook is not None:
            for attribute in flags:
                self._ethics_hook(attribute, invocation_id, caller)
        return invocation

    def get_invocation(self, invocation_id: str) -> ToolInvocation:
        with self._lock:
            invocation = self._invocations.get(invocation_id)
        if invocation is None:
            raise NotFound("unknown-tool", invocation_id)
        return invocation

    def invocation_exists(self, invocation_id: str) -> bool:
        with self._lock:
            return invocation_id in self._invocations


def _default_http_post(endpoint: str, arguments: dict[str, Any]) -> dict[str, Any]:
    import httpx

    try:
        response = httpx.post(endpoint, json=arguments, timeout=10.0)
        response.raise_for_status()
        return response.json()
    except httpx.HTTPError as exc:
        raise HadaError("downstream-unavailable", f"{endpoint}: {exc}") from exc
