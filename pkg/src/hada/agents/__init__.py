"""Stakeholder agents: scripted dialog policies behind one supervisor."""

from .controller import Controller, Services
from .intents import IntentFrame, resolve_intent
from .profiles import AgentProfile, build_profiles, role_agent_id

__all__ = [
    "AgentProfile",
    "Controller",
    "IntentFrame",
    "Services",
    "build_profiles",
    "resolve_intent",
    "role_agent_id",
]
