"""Agent registry: signed-card admission and capability discovery."""

from __future__ import annotations

import threading

from ..crypto import CardVerifier
from ..errors import HadaError, NotFound
from .model import AgentCard, card_signing_bytes


class AgentRegistry:
    def __init__(self, verifier: CardVerifier) -> None:
        self._verifier = verifier
        self._lock = threading.Lock()
        self._cards: dict[str, AgentCard] = {}

    def register(self, card: AgentCard) -> AgentCard:
        if not card.capabilities:
            raise HadaError("bad-signature", "card declares no capabilities")
        if not self._verifier.verify(card_signing_bytes(card), card.signature):
            raise HadaError("bad-signature", f"card '{card.agent_id}' failed verification")
        with self._lock:
            if card.agent_id in self._cards:
                raise HadaError("duplicate-agent-id", f"agent '{card.agent_id}' already registered")
            self._cards[card.agent_id] = card
        return card

    def get(self, agent_id: str) -> AgentCard:
        with self._lock:
            card = self._cards.get(agent_id)
        if card is None:
            raise NotFound("unknown-server-agent", agent_id)
        return card

    def __contains__(self, agent_id: str) -> bool:
        with self._lock:
            return agent_id in self._cards

    def __len__(self) -> int:
        with self._lock:
            return len(self._cards)

    def list_cards(self) -> list[AgentCard]:
        with self._lock:
            return list(self._cards.values())

    def by_capability(self, capability: str) -> list[AgentCard]:
        with self._lock:
            return [c for c in self._cards.values() if capability in c.capabilities]
