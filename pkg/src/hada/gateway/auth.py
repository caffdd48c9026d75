"""Static role-token authentication (dev profile).

Role identity is enforced at the application layer: every mutating request
must present a token that maps to a role, and that role feeds every duty
check downstream. Tokens live in a JSON profile file; one active token per
role.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any

from ..errors import HadaError


@dataclass
class TokenInfo:
    token: str
    role: str
    customer_id: str | None = None
    expires_at: str | None = None


class TokenStore:
    def __init__(self, source: str | Path | dict[str, Any], clock: Any) -> None:
        self._clock = clock
        if isinstance(source, (str, Path)):
            raw = json.loads(Path(source).read_text())
        else:
            raw = source
        self._tokens: dict[str, TokenInfo] = {}
        active_roles: set[str] = set()
        for token, spec in (raw.get("tokens") or {}).items():
            info = TokenInfo(
                token=token,
                role=spec["role"],
                customer_id=spec.get("customer_id"),
                expires_at=spec.get("expires_at"),
            )
            if info.expires_at is None:
                if info.role in active_roles:
                    raise HadaError("storage-failure", f"two active tokens for role '{info.role}'")
                active_roles.add(info.role)
            self._tokens[token] = info

    def authenticate(self, token: str | None) -> TokenInfo:
        if not token or token not in self._tokens:
            raise HadaError("unknown-token", "no valid role credential presented")
        info = self._tokens[token]
        if info.expires_at is not None:
            expiry = datetime.fromisoformat(info.expires_at)
            if self._clock.now() >= expiry:
                raise HadaError("expired-token", f"credential for role '{info.role}' has expired")
        return info

    def token_for_role(self, role: str) -> str:
        for token, info in self._tokens.items():
            if info.role == role and info.expires_at is None:
                return token
        raise HadaError("unknown-token", f"no active token for role '{role}'")
