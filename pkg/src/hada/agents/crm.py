"""CRM fixture store behind a tool-bus client interface.

Stands in for the bank's customer system: reads prefill an application,
corrections go through crmUpdate so they land on the ledger as invocations.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from ..errors import HadaError, NotFound


class CrmStore:
    def __init__(self, source: str | Path | dict[str, dict[str, Any]]) -> None:
        self._lock = threading.Lock()
        if isinstance(source, (str, Path)):
            self._records = json.loads(Path(source).read_text())
        else:
            self._records = {k: dict(v) for k, v in source.items()}

    def get(self, customer_id: str) -> dict[str, Any]:
        with self._lock:
            record = self._records.get(customer_id)
            if record is None:
                raise NotFound("unknown-customer", customer_id)
            return dict(record)

    def update(self, customer_id: str, fieldname: str, value: Any) -> dict[str, Any]:
        with self._lock:
            record = self._records.get(customer_id)
            if record is None:
                raise NotFound("unknown-customer", customer_id)
            if fieldname not in record:
                raise HadaError("schema-violation", f"CRM has no field '{fieldname}'", field=fieldname)
            record[fieldname] = value
            return dict(record)


def lookup_manifest() -> dict[str, Any]:
    return {
        "tool_id": "crmLookup",
        "name": "crmLookup",
        "description": "Reads the customer record used to prefill a loan application.",
        "input_schema": {"customer_id": {"type": "string", "required": True}},
        "output_schema": {"customer_id": {"type": "string"}},
        "endpoint": "local:crm/lookup",
        "activity": "individual-loan-decision",
        "sensitive_inputs": [],
        "version": "1.0.0",
        "transport": "local",
    }


def update_manifest() -> dict[str, Any]:
    return {
        "tool_id": "crmUpdate",
        "name": "crmUpdate",
        "description": "Corrects one field of a customer record during an application.",
        "input_schema": {
            "customer_id": {"type": "string", "required": True},
            "field": {"type": "string", "required": True},
            "value": {"type": "string", "required": True},
        },
        "output_schema": {"customer_id": {"type": "string"}},
        "endpoint": "local:crm/update",
        "activity": "individual-loan-decision",
        "sensitive_inputs": [],
        "version": "1.0.0",
        "transport": "local",
    }
