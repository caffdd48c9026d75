"""Scripted intent grammar.

A deterministic keyword/slot grammar covering exactly the intents the pilot
dialogues exercise. An optional LLM-backed resolver can replace this, but it
must emit the same frame schema; with no provider configured the grammar is
the only path, so every capability stays reachable offline.

Dialog state matters: inside a slot-filling exchange the same words parse as
field values, not as a fresh request, so the active state is consulted first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

from ..errors import HadaError

INTENTS = (
    "set_okr",
    "set_kpi_target",
    "request_retrain",
    "register_version",
    "approve_deployment",
    "apply_loan",
    "provide_application_fields",
    "confirm_terms",
    "file_complaint",
    "audit_decision",
    "flag_attribute",
    "resolve_ethics",
    "status_query",
)

# Slots that must be present before an intent may execute; a frame missing
# one is routed to input-required, never to execution.
REQUIRED_SLOTS: dict[str, list[str]] = {
    "register_version": ["version"],
    "audit_decision": ["decision_id"],
    "flag_attribute": ["attribute"],
}

AFFIRMATIVE = re.compile(
    r"^\s*(yes|yep|yeah|sure|ok(ay)?|go ahead|correct|confirmed|that's accurate|"
    r"everything('s| is) correct|proceed|please proceed|i accept|accept)\b",
    re.IGNORECASE,
)

DECISION_REF = re.compile(r"\b([0-9A-Z]{5}[A-Z]{3})\b")
VERSION_REF = re.compile(r"version\s+([0-9][\w.]*)", re.IGNORECASE)

NUMBER_WORDS = {
    "zero": 0, "none": 0, "one": 1, "two": 2, "three": 3, "four": 4,
    "five": 5, "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}

ATTRIBUTE_PATTERNS = [
    (re.compile(r"zip\s*-?\s*codes?|\bzip\b", re.IGNORECASE), "ZIP_Code"),
    (re.compile(r"\bgender\b", re.IGNORECASE), "Gender"),
    (re.compile(r"\bproperty\s*area\b", re.IGNORECASE), "PropertyArea"),
    (re.compile(r"\breligion\b", re.IGNORECASE), "Religion"),
    (re.compile(r"\bage\b", re.IGNORECASE), "Age"),
]


@dataclass
class IntentFrame:
    intent: str
    slots: dict[str, Any] = field(default_factory=dict)
    confidence: float = 1.0
    source_text: str = ""

    def missing_slots(self) -> list[str]:
        if self.slots.get("stage"):  # mid-flow continuation, context supplies the rest
            return []
        return [s for s in REQUIRED_SLOTS.get(self.intent, []) if not self.slots.get(s)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "intent": self.intent,
            "slots": self.slots,
            "confidence": self.confidence,
            "source_text": self.source_text,
        }


def detect_attribute(text: str) -> str | None:
    for pattern, attribute in ATTRIBUTE_PATTERNS:
        if pattern.search(text):
            return attribute
    return None


def _parse_amount(text: str) -> float | None:
    match = re.search(r"\$?\s*([0-9][0-9,]*(?:\.[0-9]+)?)", text)
    if match:
        return float(match.group(1).replace(",", ""))
    return None


def _parse_count(text: str) -> float | None:
    if re.search(r"not applicable|\bn/?a\b|no co-?applicant", text, re.IGNORECASE):
        return 0.0
    for word, value in NUMBER_WORDS.items():
        if re.search(rf"\b{word}\b", text, re.IGNORECASE):
            return float(value)
    return _parse_amount(text)


# An itemized answer looks like "1.) Dependents: One son 2.) LoanAmount: ...";
# each captured fragment must stop before the next "N.)" marker.
_NEXT_ITEM = r"(?=\s+\d+\s*[.)]|[;\n]|$)"


def parse_application_fields(text: str) -> dict[str, Any]:
    """Pull loan-application fields out of a free-text or itemized answer."""
    slots: dict[str, Any] = {}
    patterns = {
        "Dependents": rf"dependents?\s*[:\-]?\s*(.*?){_NEXT_ITEM}",
        "CoapplicantIncome": rf"co-?applicant\s*income\s*[:\-]?\s*(.*?){_NEXT_ITEM}",
        "LoanAmount": rf"loan\s*amount\s*[:\-]?\s*(.*?){_NEXT_ITEM}",
        "LoanTerm": rf"loan\s*term\s*[:\-]?\s*(.*?){_NEXT_ITEM}",
    }
    for fieldname, pattern in patterns.items():
        match = re.search(pattern, text, re.IGNORECASE)
        if not match:
            continue
        fragment = match.group(1)
        value = _parse_count(fragment) if fieldname in ("Dependents", "CoapplicantIncome") else _parse_amount(fragment)
        if value is not None:
            slots[fieldname] = int(value) if fieldname in ("Dependents", "LoanTerm") else value
    term = re.search(r"(\d+)\s*months", text, re.IGNORECASE)
    if term and "LoanTerm" not in slots:
        slots["LoanTerm"] = int(term.group(1))
    return slots


def _kpi_metric(text: str) -> str:
    if re.search(r"minimi[sz]\w*\s+(credit\s+)?(risk|loss|losses|problems)", text, re.IGNORECASE) or re.search(
        r"credit[- ](risk|loss)", text, re.IGNORECASE
    ):
        return "expected-loss"
    if re.search(r"acqui|new[- ]customer", text, re.IGNORECASE):
        return "acquisition-rate"
    return "expected-loss"


def resolve_intent(utterance: str, speaker_role: str, state: str | None = None) -> IntentFrame:
    """Deterministic grammar: first matching rule wins; state rules first."""
    text = utterance.strip()
    if not text:
        raise HadaError("unintelligible", "empty utterance; please rephrase")

    def frame(intent: str, **slots: Any) -> IntentFrame:
        return IntentFrame(intent=intent, slots={k: v for k, v in slots.items() if v is not None}, source_text=utterance)

    # State-scoped parses: mid-flow answers are field values or confirmations.
    if state == "slot_fill":
        fields = parse_application_fields(text)
        if fields:
            return frame("provide_application_fields", **fields)
    if state == "crm_confirm":
        correction = re.search(
            r"my\s+(income|zip\s*-?\s*code|education|property\s*area)\s+is\s+(?:actually\s+)?\$?([\w$,.]+)",
            text,
            re.IGNORECASE,
        )
        if correction:
            fieldname = {
                "income": "ApplicantIncome",
                "education": "Education",
            }.get(correction.group(1).lower().replace(" ", ""), None)
            if fieldname is None:
                cleaned = correction.group(1).lower().replace(" ", "").replace("-", "")
                fieldname = "ZIP_Code" if "zip" in cleaned else "PropertyArea"
            raw = correction.group(2).rstrip(".,")
            value: Any = raw.replace("$", "").replace(",", "") if fieldname == "ApplicantIncome" else raw
            return frame("provide_application_fields", correction=(fieldname, value))
    if state in ("crm_consent", "crm_confirm", "details_confirm") and AFFIRMATIVE.match(text):
        return frame("provide_application_fields", confirmed=True)
    if state == "version_registered" and re.search(r"highlight|justif|emphasi|accelerate", text, re.IGNORECASE):
        return frame("register_version", stage="annotate")
    if state == "ethics_resolved":
        return frame("status_query")
    if state and state.startswith("complaint_"):
        return frame("file_complaint", stage=state)
    if re.search(r"keep me (posted|informed)", text, re.IGNORECASE):
        return frame("status_query")
    if state == "terms" and AFFIRMATIVE.match(text):
        return frame("confirm_terms", accepted=True)
    if state == "ethics_proposal" and re.search(r"proceed|approve|both items|sounds? sound", text, re.IGNORECASE):
        return frame("resolve_ethics", flag=True, retrain=True, stage="execute")

    rules: list[tuple[re.Pattern[str], str]] = [
        (re.compile(r"\bokrs?\b|quarterly (objectives?|targets?)|objectives? and key results", re.IGNORECASE), "set_okr"),
        (re.compile(r"business (target|objective)|optimi[sz]ation target|kpi target|update .* target", re.IGNORECASE), "set_kpi_target"),
        (re.compile(r"\bretrain", re.IGNORECASE), "request_retrain"),
        (re.compile(r"version\s+[0-9][\w.]*.{0,20}\bis ready\b|new .*model.* ready|ready for (business )?approval", re.IGNORECASE), "register_version"),
        (re.compile(r"(approve|reject)\b.{0,40}\b(deployment|to production|version)", re.IGNORECASE), "approve_deployment"),
        (re.compile(r"\b(apply|application)\b.{0,40}\bloan\b|\bloan application\b", re.IGNORECASE), "apply_loan"),
        (re.compile(r"complaint|ethically questionable|discriminat|feels? unfair|indirect discrimination", re.IGNORECASE), "file_complaint"),
        (re.compile(r"\baudit\b|decision (criteria|path|lineage)|reference number", re.IGNORECASE), "audit_decision"),
        (re.compile(r"flag\b.{0,60}(sensitive|watchlist)|add .{0,40} to the watchlist|mark .{0,40} as sensitive", re.IGNORECASE), "flag_attribute"),
        (re.compile(r"proceed with both|both items|\bdismiss\b|mitigation", re.IGNORECASE), "resolve_ethics"),
        (re.compile(r"\bstatus\b|keep me (informed|posted)|any update|progress report|milestones", re.IGNORECASE), "status_query"),
        (re.compile(r"accept (those|the) terms|i accept", re.IGNORECASE), "confirm_terms"),
    ]
    for pattern, intent in rules:
        if not pattern.search(text):
            continue
        if intent == "set_okr":
            # "quarterly OKRs" wins even when the surrounding process is annual.
            if re.search(r"quarter", text, re.IGNORECASE):
                horizon = "quarterly"
            elif re.search(r"\byearly\b|\bannual", text, re.IGNORECASE):
                horizon = "yearly"
            else:
                horizon = "quarterly"
            return frame("set_okr", metric=_kpi_metric(text), horizon=horizon)
        if intent == "set_kpi_target":
            return frame("set_kpi_target", metric=_kpi_metric(text))
        if intent == "register_version":
            match = VERSION_REF.search(text)
            return frame("register_version", version=match.group(1).rstrip(".,") if match else None)
        if intent == "approve_deployment":
            match = VERSION_REF.search(text)
            decision = "reject" if re.search(r"\breject", text, re.IGNORECASE) else "approve"
            return frame("approve_deployment", version=match.group(1).rstrip(".,") if match else None, decision=decision)
        if intent == "audit_decision":
            match = DECISION_REF.search(text)
            pin = VERSION_REF.search(text)
            return frame(
                "audit_decision",
                decision_id=match.group(1) if match else None,
                version=pin.group(1).rstrip(".,") if pin else None,
            )
        if intent == "file_complaint":
            return frame("file_complaint", attribute=detect_attribute(text))
        if intent == "flag_attribute":
            return frame("flag_attribute", attribute=detect_attribute(text))
        if intent == "resolve_ethics":
            execute = bool(re.search(r"proceed", text, re.IGNORECASE))
            dismiss = bool(re.search(r"dismiss", text, re.IGNORECASE))
            return frame(
                "resolve_ethics",
                stage="execute" if (execute or dismiss) else "consult",
                flag=execute and not dismiss,
                retrain=execute and not dismiss,
                dismiss=dismiss,
                all=bool(re.search(r"\ball\b", text, re.IGNORECASE)),
                attribute=detect_attribute(text),
            )
        if intent == "request_retrain":
            return frame("request_retrain", attribute=detect_attribute(text), exclude=detect_attribute(text))
        return frame(intent)

    fields = parse_application_fields(text)
    if fields:
        return frame("provide_application_fields", **fields)
    raise HadaError("unintelligible", f"could not map the request to a known intent: {text[:80]!r}")
