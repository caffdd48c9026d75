"""Runtime-wide signing keypair for agent cards.

One Ed25519 keypair per runtime keeps card verification simple: every card is
signed at startup and the registry rejects anything the configured public key
does not verify. Dev/replay profiles derive the key from a seed string so the
signatures are stable across runs.
"""

from __future__ import annotations

import hashlib

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)


class CardSigner:
    def __init__(self, private_key: Ed25519PrivateKey) -> None:
        self._private = private_key
        self.public_key = private_key.public_key()

    @classmethod
    def from_seed(cls, seed: str) -> "CardSigner":
        raw = hashlib.sha256(f"hada-card-key:{seed}".encode()).digest()
        return cls(Ed25519PrivateKey.from_private_bytes(raw))

    def sign(self, payload: bytes) -> str:
        return self._private.sign(payload).hex()

    def verifier(self) -> "CardVerifier":
        return CardVerifier(self.public_key)


class CardVerifier:
    def __init__(self, public_key: Ed25519PublicKey) -> None:
        self._public = public_key

    def verify(self, payload: bytes, signature_hex: str) -> bool:
        try:
            self._public.verify(bytes.fromhex(signature_hex), payload)
            return True
        except (InvalidSignature, ValueError):
            return False
