"""HADA: a human/agent decision-alignment runtime.

Stakeholder agents coordinate over an agent-to-agent task protocol, act
through a manifest-described tool bus, and every governance event and
credit decision lands on an append-only, hash-chained ledger.
"""

__version__ = "0.1.0"
