"""Error type shared across the runtime.

Every failure carries a stable machine-readable ``code`` (the strings the
HTTP layer and the CLI surface) plus optional structured details.
"""

from __future__ import annotations

from typing import Any


class HadaError(Exception):
    def __init__(self, code: str, message: str, **details: Any) -> None:
        super().__init__(message)
        self.code = code
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"error": self.code, "message": self.message}
        if self.details:
            out["details"] = self.details
        return out


class PolicyDenied(HadaError):
    """Actor lacks R/A (or required involvement) on the governing activity."""

    def __init__(self, actor: str, activity: str, accountable: str | None) -> None:
        who = accountable or "no role"
        super().__init__(
            "policy-denied",
            f"role '{actor}' may not perform '{activity}'; accountable role is '{who}'",
            actor=actor,
            activity=activity,
            accountable=accountable,
        )
        self.accountable = accountable


class IllegalTransition(HadaError):
    def __init__(self, code: str, entity: str, state: str, trigger: str) -> None:
        super().__init__(
            code,
            f"{entity} in state '{state}' does not accept '{trigger}'",
            state=state,
            trigger=trigger,
        )


class NotFound(HadaError):
    def __init__(self, code: str, ref: str) -> None:
        super().__init__(code, f"{code.replace('-', ' ')}: {ref}", ref=ref)
