"""Application schema and CSV ingestion for the loan-decision tool.

The dataset follows the public loan-prediction layout (an id column, eleven
applicant attributes, a Y/N status label) extended with a five-digit
ZIP_Code column. Ingestion imputes missing numerics with the column median
and missing categoricals with the mode, and reports everything it did.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import HadaError

ID_COLUMN = "Loan_ID"
LABEL_COLUMN = "Loan_Status"

# feature -> (kind, closed value set or None)
FEATURES: dict[str, tuple[str, list[str] | None]] = {
    "Gender": ("categorical", ["Male", "Female"]),
    "Married": ("categorical", ["Yes", "No"]),
    "Dependents": ("numeric", None),
    "Education": ("categorical", ["Graduate", "Not Graduate"]),
    "SelfEmployed": ("categorical", ["Yes", "No"]),
    "ApplicantIncome": ("numeric", None),
    "CoapplicantIncome": ("numeric", None),
    "LoanAmount": ("numeric", None),
    "LoanTerm": ("numeric", None),
    "CreditHistory": ("categorical", ["Yes", "No"]),
    "PropertyArea": ("categorical", None),
    "ZIP_Code": ("categorical", None),
}

FEATURE_LIST = list(FEATURES)
FEATURE_KINDS = {name: kind for name, (kind, _) in FEATURES.items()}

LABEL_ALIASES = {"Y": "approved", "N": "rejected", "approved": "approved", "rejected": "rejected"}

FIELD_TITLES = {
    "Dependents": "Dependents",
    "CoapplicantIncome": "Co-applicant Income",
    "LoanAmount": "LoanAmount",
    "LoanTerm": "LoanTerm",
    "ApplicantIncome": "ApplicantIncome",
    "CreditHistory": "CreditHistory",
    "ZIP_Code": "ZIP_Code",
}


@dataclass
class Dataset:
    rows: list[dict[str, Any]]
    labels: list[str]
    feature_list: list[str]
    feature_kinds: dict[str, str]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class IngestReport:
    path: str
    row_count: int = 0
    skipped_rows: list[dict[str, Any]] = field(default_factory=list)
    missing_counts: dict[str, int] = field(default_factory=dict)
    imputations: dict[str, Any] = field(default_factory=dict)
    unknown_columns: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "path": self.path,
            "row_count": self.row_count,
            "skipped_rows": self.skipped_rows,
            "missing_counts": self.missing_counts,
            "imputations": self.imputations,
            "unknown_columns": self.unknown_columns,
        }


def parse_numeric(feature: str, raw: Any) -> float:
    if isinstance(raw, bool):
        raise HadaError("type-mismatch", f"'{feature}' must be numeric", ref=feature)
    if isinstance(raw, (int, float)):
        value = float(raw)
    else:
        text = str(raw).strip().replace("$", "").replace(",", "")
        if feature == "Dependents" and text.endswith("+"):
            text = text[:-1]
        try:
            value = float(text)
        except ValueError:
            raise HadaError("type-mismatch", f"'{feature}' value {raw!r} is not numeric", ref=feature)
    if feature in ("ApplicantIncome", "CoapplicantIncome", "Dependents") and value < 0:
        raise HadaError("type-mismatch", f"'{feature}' must be non-negative", ref=feature)
    if feature in ("LoanAmount", "LoanTerm") and value <= 0:
        raise HadaError("type-mismatch", f"'{feature}' must be positive", ref=feature)
    return value


def parse_categorical(feature: str, raw: Any) -> str:
    value = str(raw).strip()
    _, allowed = FEATURES[feature]
    if feature == "CreditHistory" and value in ("1", "1.0", "0", "0.0"):
        value = "Yes" if value.startswith("1") else "No"
    if allowed is not None and value not in allowed:
        raise HadaError(
            "type-mismatch", f"'{feature}' value {raw!r} not in {allowed}", ref=feature
        )
    if feature == "ZIP_Code" and not (len(value) == 5 and value.isdigit()):
        raise HadaError("type-mismatch", f"'{feature}' must be a 5-digit code", ref=feature)
    return value


def parse_value(feature: str, raw: Any) -> Any:
    if feature not in FEATURES:
        raise HadaError("type-mismatch", f"unknown feature '{feature}'", ref=feature)
    kind = FEATURE_KINDS[feature]
    return parse_numeric(feature, raw) if kind == "numeric" else parse_categorical(feature, raw)


def validate_application(application: dict[str, Any], required_features: list[str]) -> dict[str, Any]:
    """Check and normalize the fields a given model version needs."""
    out: dict[str, Any] = {}
    for feature in required_features:
        if feature not in application or application[feature] in (None, ""):
            raise HadaError("missing-feature", f"application lacks '{feature}'", ref=feature)
        out[feature] = parse_value(feature, application[feature])
    return out


def _is_missing(raw: str | None) -> bool:
    return raw is None or str(raw).strip() in ("", "NA", "N/A", "nan", "None")


def ingest_csv(path: str | Path) -> tuple[Dataset, IngestReport]:
    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise HadaError("missing-column", f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        required = set(FEATURES) | {LABEL_COLUMN}
        missing = sorted(required - set(header))
        if missing:
            raise HadaError("missing-column", f"CSV lacks column(s): {', '.join(missing)}", columns=missing)
        report = IngestReport(path=str(path))
        report.unknown_columns = sorted(set(header) - required - {ID_COLUMN})
        raw_rows: list[tuple[int, dict[str, str]]] = []
        for lineno, raw in enumerate(reader, start=2):
            raw_rows.append((lineno, raw))

    # First pass: collect observed values per column for imputation.
    observed: dict[str, list[Any]] = {f: [] for f in FEATURES}
    for _, raw in raw_rows:
        for feature in FEATURES:
            if not _is_missing(raw.get(feature)):
                try:
                    observed[feature].append(parse_value(feature, raw[feature]))
                except HadaError:
                    continue
    fills: dict[str, Any] = {}
    for feature, values in observed.items():
        if not values:
            continue
        if FEATURE_KINDS[feature] == "numeric":
            fills[feature] = float(statistics.median(values))
        else:
            fills[feature] = statistics.mode(values)

    rows: list[dict[str, Any]] = []
    labels: list[str] = []
    for lineno, raw in raw_rows:
        try:
            label_raw = str(raw.get(LABEL_COLUMN, "")).strip()
            if label_raw not in LABEL_ALIASES:
                raise HadaError("unparseable-row", f"bad label {label_raw!r}", ref=LABEL_COLUMN)
            row: dict[str, Any] = {}
            for feature in FEATURES:
                if _is_missing(raw.get(feature)):
                    if feature not in fills:
                        raise HadaError("unparseable-row", f"no value or imputation for '{feature}'", ref=feature)
                    row[feature] = fills[feature]
                    report.missing_counts[feature] = report.missing_counts.get(feature, 0) + 1
                else:
                    row[feature] = parse_value(feature, raw[feature])
            rows.append(row)
            labels.append(LABEL_ALIASES[label_raw])
        except HadaError as exc:
            report.skipped_rows.append({"line": lineno, "reason": exc.message})
    report.row_count = len(rows)
    report.imputations = {f: fills[f] for f, n in sorted(report.missing_counts.items()) if f in fills}
    dataset = Dataset(
        rows=rows,
        labels=labels,
        feature_list=list(FEATURE_LIST),
        feature_kinds=dict(FEATURE_KINDS),
    )
    return dataset, report
