"""Canonical JSON encoding and digests.

All signatures and ledger hashes are computed over this form: UTF-8 JSON
with keys sorted lexicographically and no insignificant whitespace.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_bytes(obj: Any) -> bytes:
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest(obj: Any) -> str:
    return sha256_hex(canonical_bytes(obj))
