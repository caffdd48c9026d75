"""Cross-module invariants checked over a full scenario run."""

from __future__ import annotations

import time

import pytest

from hada.loan.tree import DecisionTree, replay_path
from hada.scenarios import load_scripts
from hada.scenarios.runner import ScenarioRunner


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    runner = ScenarioRunner(str(tmp_path_factory.mktemp("invariants")))
    for script in load_scripts():
        result = runner.run_script(script)
        assert result.ok, (script.scenario_id, [f for s in result.steps for f in s.failures])
    yield runner
    runner.close()


def test_ledger_completeness_cross_counts(full_run):
    # Every catalogue mutation and invocation must have landed on the ledger:
    # compare materialized-state counters against per-kind entry counts.
    runtime = full_run.runtime
    counts = runtime.ledger.kind_counts()

    ticket_events = sum(len(t.history) for t in runtime.catalog.tickets.values())
    assert counts["ticket"] == ticket_events

    # one register event per version, plus one event per status hop
    assert counts_registered(runtime) == len(runtime.catalog.versions)
    assert counts["version"] >= len(runtime.catalog.versions)

    assert counts["watchlist"] == len(runtime.catalog.watchlist)
    assert counts["objective"] == len(runtime.catalog.objectives)
    assert counts["kpi-binding"] == len(runtime.catalog.bindings)
    assert counts["invocation"] == len(runtime.bus._invocations)
    decision_entries = [e for e in runtime.ledger.iter_kind("decision")]
    assert len(decision_entries) >= len(runtime.ledger.list_decisions())
    # triggers: one raise event each, plus one update per resolution
    raises = sum(1 for e in runtime.ledger.iter_kind("ethics-flag") if e.payload["action"] == "raise")
    assert raises == len(runtime.catalog.triggers)


def counts_registered(runtime) -> int:
    return sum(
        1 for e in runtime.ledger.iter_kind("version") if e.payload.get("action") == "register"
    )


def test_every_decision_entry_replays_to_recorded_outcome(full_run):
    # Replay equivalence must hold for 100% of decision entries, production
    # and audit replays alike: walking the recorded path through the stored
    # tree reaches the recorded outcome.
    runtime = full_run.runtime
    checked = 0
    for entry in runtime.ledger.iter_kind("decision"):
        payload = entry.payload
        version = runtime.catalog.get_version(payload["tool_id"], payload["model_version"])
        tree = DecisionTree.from_dict(version.tree)
        outcome = replay_path(tree, payload["decision_path"], payload["feature_vector"])
        assert outcome == payload["outcome"], payload["decision_id"]
        checked += 1
    assert checked >= 4  # flagship + variant decisions and audit replays


def test_role_agent_bijection(full_run):
    runtime = full_run.runtime
    roles = [p.role for p in runtime.profiles.values()]
    assert len(roles) == len(set(roles)) == 7
    for role, profile in runtime.profiles.items():
        assert profile.role == role
        assert profile.card is not None and profile.card.agent_id


def test_load_smoke(full_run):
    # Not a scalability claim: just confirms the materialized read paths and
    # the decision endpoint sustain a burst without degradation or errors.
    runtime = full_run.runtime
    application = {"CreditHistory": "Yes", "ZIP_Code": "75201", "ApplicantIncome": 4100.0}
    started = time.monotonic()
    for _ in range(200):
        runtime.catalog.list_tickets()
        runtime.catalog.production_version("getLoanDecision")
        runtime.policy.authorize("business-manager", "approve-deployment")
    decisions = 0
    for _ in range(50):
        result = runtime.engine.serve_decision("production", application, "hada", task_id="T-000001")
        decisions += result["outcome"] in ("approved", "rejected")
    elapsed = time.monotonic() - started
    assert decisions == 50
    assert runtime.ledger.verify_chain().valid
    assert elapsed < 20
