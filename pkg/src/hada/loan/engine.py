"""Decision service for the loan tool.

Resolves a model version from the catalogue (production by default, a pinned
version for audit replays), scores the application, writes the lineage record
to the ledger, and renders the customer-facing explanation.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

from ..catalog import Catalog
from ..errors import HadaError, NotFound, PolicyDenied
from ..ledger import DecisionRecord, Ledger
from ..policy import PolicyService
from .metrics import compute_validation_metrics
from .schema import Dataset, validate_application
from .tree import DecisionTree, TrainingConfig, deserialize_tree, score, train

TOOL_ID = "getLoanDecision"

FIXTURE_TREES = {"1.0": "v1_0.json", "1.1": "v1_1.json", "1.2": "v1_2.json"}


def load_fixture_tree(version: str) -> DecisionTree:
    filename = FIXTURE_TREES.get(version)
    if filename is None:
        raise NotFound("unknown-model", f"no fixture tree for version {version}")
    blob = resources.files("hada.data").joinpath(f"trees/{filename}").read_bytes()
    return deserialize_tree(blob)


def render_explanation(path: list[dict[str, Any]], outcome: str, version: str) -> str:
    """Deterministic natural-language rendering of a decision path."""
    if not path:
        return f"The model (version {version}) returned '{outcome}' without evaluating any split."
    clauses = []
    for step in path:
        if step["comparator"] == "<=":
            relation = "at most" if step["branch"] == "left" else "above"
            clauses.append(f"{step['feature']} was {relation} {step['threshold']:g}")
        else:
            relation = "matched" if step["branch"] == "left" else "did not match"
            clauses.append(f"{step['feature']} {relation} '{step['threshold']}'")
    factors = "; ".join(clauses)
    features = ", ".join(dict.fromkeys(s["feature"] for s in path))
    return (
        f"Decision '{outcome}' by model version {version} considered: {factors}. "
        f"Features factored into this decision: {features}."
    )


class LoanEngine:
    def __init__(self, catalog: Catalog, ledger: Ledger, policy: PolicyService, ids: Any, clock: Any) -> None:
        self._catalog = catalog
        self._ledger = ledger
        self._policy = policy
        self._ids = ids
        self._clock = clock

    # -- scoring ------------------------------------------------------------

    def _resolve_version(self, model_id: str, actor: str, audit_pin: bool):
        production = self._catalog.production_version(TOOL_ID)
        if model_id in ("production", ""):
            if production is None:
                raise HadaError("not-in-production", f"{TOOL_ID} has no production version")
            return production, False
        record = self._catalog.get_version(TOOL_ID, model_id)
        if production is not None and record.version == production.version:
            return record, False
        if not audit_pin:
            raise HadaError(
                "not-in-production",
                f"version {model_id} is {record.status}; pin it explicitly for an audit replay",
            )
        auth = self._policy.authorize(actor, "audit-decision")
        if not (auth.assignment & {"R", "A"}):
            raise PolicyDenied(actor, "audit-decision", auth.accountable)
        return record, True

    def serve_decision(
        self,
        model_id: str,
        application: dict[str, Any],
        actor: str,
        task_id: str = "",
        audit_pin: bool = False,
    ) -> dict[str, Any]:
        record, is_replay = self._resolve_version(model_id, actor, audit_pin)
        tree = DecisionTree.from_dict(record.tree)
        features = validate_application(application, tree.feature_list)
        outcome, path = score(tree, features)
        explanation = render_explanation(path, outcome, record.version)
        activity = "audit-decision" if is_replay else "individual-loan-decision"
        matrix = self._policy.matrix
        decision_id = self._ids.next_decision()
        lineage = DecisionRecord(
            decision_id=decision_id,
            tool_id=TOOL_ID,
            model_version=record.version,
            feature_vector=features,
            decision_path=path,
            applied_policy={
                "activity": activity,
                "roles": {
                    "acting": actor,
                    "responsible": matrix.roles_with(activity, "R"),
                    "accountable": matrix.accountable_for(activity),
                    "consulted": matrix.roles_with(activity, "C"),
                },
            },
            outcome=outcome,
            customer_task_id=task_id,
            explanation_text=explanation,
            record_type="audit-replay" if is_replay else "production",
        )
        self._ledger.record_decision(lineage)
        return {
            "decision_id": decision_id,
            "outcome": outcome,
            "explanation": explanation,
            "model_version": record.version,
            "decision_path": path,
            "record_type": lineage.record_type,
        }

    # -- training ------------------------------------------------------------

    def run_training_job(
        self,
        actor: str,
        version: str,
        exclude: list[str] | None = None,
        max_depth: int = 3,
        fixture: str | None = None,
        dataset: Dataset | None = None,
        holdout: Dataset | None = None,
    ) -> dict[str, Any]:
        """Produce a tree (fixture-pinned or trained), validate it, register it.

        Scenario replays pin a documented fixture tree so transcripts are
        reproducible; ad-hoc jobs train on the supplied dataset.
        """
        exclude = exclude or []
        if fixture is not None:
            tree = load_fixture_tree(fixture)
            if exclude and set(tree.feature_list) & set(exclude):
                raise HadaError(
                    "schema-violation",
                    f"fixture {fixture} uses excluded feature(s) {sorted(set(tree.feature_list) & set(exclude))}",
                )
        else:
            if dataset is None:
                raise HadaError("empty-dataset", "training requires a dataset or a fixture reference")
            tree = train(dataset, TrainingConfig(max_depth=max_depth, excluded_features=exclude))
        metrics: dict[str, float] = {}
        if holdout is not None and holdout.rows:
            metrics = compute_validation_metrics(tree, holdout)
        registered = self._catalog.register_version(
            TOOL_ID,
            version,
            tree.feature_list,
            tree.to_dict(),
            metrics,
            actor,
        )
        return {
            "version": registered.version,
            "status": registered.status,
            "feature_list": registered.feature_list,
            **{k: float(v) for k, v in metrics.items()},
        }

    # -- audit helpers ------------------------------------------------------------

    def replay_decision(self, decision_id: str) -> dict[str, Any]:
        """Re-walk a recorded decision path on the stored tree."""
        record, proof = self._ledger.query_decision(decision_id)
        version = self._catalog.get_version(record.tool_id, record.model_version)
        tree = DecisionTree.from_dict(version.tree)
        outcome, path = score(tree, record.feature_vector)
        return {
            "decision_id": decision_id,
            "stored_outcome": record.outcome,
            "replayed_outcome": outcome,
            "consistent": outcome == record.outcome and path == record.decision_path,
            "inclusion_proof": proof,
            "model_version": record.model_version,
        }


def tool_manifest() -> dict[str, Any]:
    """Manifest for the decision endpoint (see docs/toolbus.md)."""
    fields = {
        "Gender": {"type": "enum", "values": ["Male", "Female"]},
        "Married": {"type": "enum", "values": ["Yes", "No"]},
        "Dependents": {"type": "number"},
        "Education": {"type": "enum", "values": ["Graduate", "Not Graduate"]},
        "SelfEmployed": {"type": "enum", "values": ["Yes", "No"]},
        "ApplicantIncome": {"type": "number"},
        "CoapplicantIncome": {"type": "number"},
        "LoanAmount": {"type": "number"},
        "LoanTerm": {"type": "number"},
        "CreditHistory": {"type": "enum", "values": ["Yes", "No"]},
        "PropertyArea": {"type": "string"},
        "ZIP_Code": {"type": "string"},
    }
    return {
        "tool_id": TOOL_ID,
        "name": "getLoanDecision",
        "description": "Scores a loan application with the production decision tree and records full lineage.",
        "input_schema": fields,
        "output_schema": {
            "decision_id": {"type": "string"},
            "outcome": {"type": "enum", "values": ["approved", "rejected"]},
            "explanation": {"type": "string"},
            "model_version": {"type": "string"},
        },
        "endpoint": "local:loan-engine/decision",
        "activity": "individual-loan-decision",
        "sensitive_inputs": ["Gender", "ZIP_Code"],
        "version": "1.0.0",
        "transport": "local",
    }


def training_manifest() -> dict[str, Any]:
    return {
        "tool_id": "trainLoanModel",
        "name": "trainLoanModel",
        "description": "Trains or pins a loan decision tree version and registers it in the model catalogue.",
        "input_schema": {
            "version": {"type": "string", "required": True},
            "fixture": {"type": "string"},
            "exclude": {"type": "string"},  # comma-separated feature names
            "max_depth": {"type": "integer"},
            "dataset": {"type": "string"},  # path to a CSV in the runtime data dir
        },
        "output_schema": {
            "version": {"type": "string"},
            "status": {"type": "string"},
            "expected_loss_proxy": {"type": "number"},
            "accuracy": {"type": "number"},
        },
        "endpoint": "local:loan-engine/train",
        "activity": "optimize-ai-tools",
        "sensitive_inputs": [],
        "version": "1.0.0",
        "transport": "local",
    }


def bundled_sample_path() -> str:
    with resources.as_file(resources.files("hada.data").joinpath("sample_loans.csv")) as path:
        return str(path)
