"""Optional LLM-backed intent resolution.

Disabled unless a provider is configured; the scripted grammar is always the
fallback, so every capability works with no provider at all. A provider must
return a JSON object matching the IntentFrame schema; anything unparseable
degrades to a zero-confidence status query rather than an error.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Any, Callable, Protocol

from .intents import INTENTS, IntentFrame

log = logging.getLogger(__name__)


@dataclass
class LlmProviderConfig:
    provider: str
    endpoint: str
    model: str
    key_file: str | None = None
    timeout: float = 30.0

    @classmethod
    def from_env(cls, env: dict[str, str]) -> "LlmProviderConfig | None":
        provider = env.get("HADA_LLM_PROVIDER")
        if not provider:
            return None
        return cls(
            provider=provider,
            endpoint=env.get("HADA_LLM_ENDPOINT", ""),
            model=env.get("HADA_LLM_MODEL", ""),
            key_file=env.get("HADA_LLM_KEY_FILE"),
        )


class LlmClient(Protocol):
    def complete(self, system_prompt: str, utterance: str) -> str: ...


SYSTEM_PROMPT = (
    "Classify the user's request into one of these intents and extract slots. "
    f"Intents: {', '.join(INTENTS)}. Respond with JSON: "
    '{"intent": ..., "slots": {...}, "confidence": 0..1}.'
)


class DeterministicStubClient:
    """Offline stand-in used by tests: replies from a fixed lookup table."""

    def __init__(self, responses: dict[str, str] | None = None) -> None:
        self._responses = responses or {}

    def complete(self, system_prompt: str, utterance: str) -> str:
        return self._responses.get(utterance, "")


def http_client(config: LlmProviderConfig) -> LlmClient:
    import httpx

    key = ""
    if config.key_file:
        with open(config.key_file, "r", encoding="utf-8") as fh:
            key = fh.read().strip()

    class _Http:
        def complete(self, system_prompt: str, utterance: str) -> str:
            response = httpx.post(
                config.endpoint,
                json={"model": config.model, "system": system_prompt, "input": utterance},
                headers={"Authorization": f"Bearer {key}"} if key else {},
                timeout=config.timeout,
            )
            response.raise_for_status()
            return response.text

    return _Http()


class LlmIntentResolver:
    def __init__(self, client: LlmClient) -> None:
        self._client = client

    def resolve(self, utterance: str, role: str, state: str | None) -> IntentFrame | None:
        try:
            raw = self._client.complete(SYSTEM_PROMPT, utterance)
            parsed = json.loads(raw)
            intent = parsed["intent"]
            if intent not in INTENTS:
                raise ValueError(f"unknown intent {intent!r}")
            slots = parsed.get("slots") or {}
            if not isinstance(slots, dict):
                raise ValueError("slots must be an object")
            return IntentFrame(
                intent=intent,
                slots=slots,
                confidence=float(parsed.get("confidence", 1.0)),
                source_text=utterance,
            )
        except Exception as exc:  # noqa: BLE001 - degrade, never fail the turn
            log.warning("LLM intent resolution degraded to status_query: %s", exc)
            return IntentFrame(intent="status_query", slots={}, confidence=0.0, source_text=utterance)
