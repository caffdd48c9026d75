"""Acceptance suite: one test per top-level criterion, each printing a
PASS/FAIL line with its measured numbers. Run with `pytest tests/test_acceptance.py -s`
to see the per-criterion report."""

from __future__ import annotations

import itertools
import json
import random
import time

import pytest

from hada.a2a import TRANSITIONS, TaskState, TaskStore, Trigger
from hada.catalog import Catalog
from hada.clock import Clock
from hada.errors import HadaError
from hada.gateway.config import RuntimeConfig
from hada.gateway.runtime import Runtime
from hada.identifiers import IdFactory
from hada.ledger import Ledger
from hada.loan.schema import Dataset
from hada.loan.tree import TrainingConfig, train
from hada.policy import PolicyService, RaciMatrix, bundled_matrix_path
from hada.scenarios import load_scripts, run_all
from hada.scenarios.runner import ScenarioRunner

from oracles import oracle_train


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# -- criterion: scenario fidelity -------------------------------------------------


def test_scenario_fidelity(tmp_path):
    started = time.monotonic()
    runner = ScenarioRunner(str(tmp_path / "flagship"))
    try:
        results = [runner.run_script(s) for s in load_scripts()[:5]]
        failures = [
            f"{r.scenario_id}: {f}" for r in results for s in r.steps for f in s.failures
        ]
        replies = " ".join(s.reply for r in results for s in r.steps)
        catalog = runner.runtime.catalog
        checks = {
            "all steps pass": not failures,
            "DS ticket on KPI change": catalog.get_ticket("DS-10452").kind == "model-development",
            "OPS approval flow": any("Approved—Deploying" in h["note"] for h in catalog.get_ticket("OPS-3417").history),
            "loan reference 90210ABC": "90210ABC" in replies
            and runner.runtime.ledger.query_decision("90210ABC")[0].outcome == "approved",
            "ethics ticket ETH-512": catalog.get_ticket("ETH-512").kind == "ethics",
            "remediation": "ZIP_Code" in catalog.active_watchlist()
            and "ZIP_Code" in catalog.get_ticket("DS-10453").subject,
        }
        elapsed = time.monotonic() - started
        checks["runtime < 60 s"] = elapsed < 60
        bad = [k for k, v in checks.items() if not v] + failures[:3]
        report(
            "scenario fidelity",
            not bad,
            f"5 flagship scenarios in {elapsed:.1f}s; " + ("all outcomes reproduced" if not bad else "; ".join(bad)),
        )
    finally:
        runner.close()


# -- criterion: coverage matrix -------------------------------------------------


def test_coverage_matrix(tmp_path):
    started = time.monotonic()
    result = run_all(str(tmp_path / "all"))
    elapsed = time.monotonic() - started
    unresolved = []
    for cell in result.cells.values():
        if cell.applicable and cell.satisfied and not cell.evidence:
            unresolved.append((cell.role, cell.objective))
    ok = (
        result.dialogue_count == 36
        and result.all_steps_passed
        and not result.unsatisfied_cells
        and not unresolved
        and elapsed < 300
    )
    applicable = sum(1 for c in result.cells.values() if c.applicable)
    report(
        "coverage matrix",
        ok,
        f"{result.dialogue_count} dialogues, {applicable}/{applicable} applicable cells satisfied "
        f"with resolvable evidence in {elapsed:.1f}s",
    )


# -- criterion: task lifecycle -------------------------------------------------


def test_task_lifecycle():
    started = time.monotonic()
    legal = {
        (TaskState.SUBMITTED, Trigger.START, TaskState.WORKING),
        (TaskState.SUBMITTED, Trigger.CANCEL, TaskState.CANCELED),
        (TaskState.WORKING, Trigger.REQUIRE_INPUT, TaskState.INPUT_REQUIRED),
        (TaskState.WORKING, Trigger.COMPLETE, TaskState.COMPLETED),
        (TaskState.WORKING, Trigger.FAIL, TaskState.FAILED),
        (TaskState.WORKING, Trigger.CANCEL, TaskState.CANCELED),
        (TaskState.INPUT_REQUIRED, Trigger.RESUME, TaskState.WORKING),
        (TaskState.INPUT_REQUIRED, Trigger.CANCEL, TaskState.CANCELED),
    }
    observed = {(s, t, TRANSITIONS[(s, t)]) for s, t in TRANSITIONS}
    exhaustive_ok = observed == legal and all(
        ((s, t) in TRANSITIONS) == any(e[0] == s and e[1] == t for e in legal)
        for s, t in itertools.product(TaskState, Trigger)
    )

    rng = random.Random(20260810)
    store = TaskStore(Clock("simulated"), IdFactory(), known_agent=lambda a: True)
    triggers = list(Trigger)
    violations = 0
    reached: set[TaskState] = set()
    for _ in range(10_000):
        task = store.send_task("a", "b", __import__("hada.a2a.model", fromlist=["Message"]).Message.user_text("x"))
        state = task.state
        reached.add(state)
        for _ in range(rng.randint(0, 8)):
            trigger = rng.choice(triggers)
            expected = TRANSITIONS.get((state, trigger))
            try:
                state = store.transition(task.task_id, trigger).state
                if expected is None or state != expected:
                    violations += 1
                reached.add(state)
            except HadaError:
                if expected is not None:
                    violations += 1
        events = store.events(task.task_id)
        if [e.sequence_no for e in events] != list(range(1, len(events) + 1)):
            violations += 1
    elapsed = time.monotonic() - started
    ok = exhaustive_ok and violations == 0 and reached <= set(TaskState) and elapsed < 10
    report(
        "task lifecycle",
        ok,
        f"edge set exact, 10^4 random sequences, {violations} violations, "
        f"{len(reached)} states reached, {elapsed:.1f}s",
    )


# -- criterion: trainer-oracle equivalence -------------------------------------------------


def test_trainer_oracle_equivalence():
    started = time.monotonic()
    rng = random.Random(424242)
    mismatches = 0
    for _ in range(200):
        n_rows = rng.randint(2, 12)
        n_features = rng.randint(1, 3)
        feature_list = [f"f{i}" for i in range(n_features)]
        kinds = {f: rng.choice(["numeric", "categorical"]) for f in feature_list}
        rows = [
            {
                f: (float(rng.randint(0, 6)) if kinds[f] == "numeric" else rng.choice(["a", "b", "c"]))
                for f in feature_list
            }
            for _ in range(n_rows)
        ]
        labels = [rng.choice(["approved", "rejected"]) for _ in range(n_rows)]
        dataset = Dataset(rows=rows, labels=labels, feature_list=feature_list, feature_kinds=kinds)
        depth = rng.randint(1, 2)
        min_leaf = rng.randint(1, 2)
        tree = train(dataset, TrainingConfig(max_depth=depth, min_samples_leaf=min_leaf))
        expected = oracle_train(rows, labels, feature_list, kinds, depth, min_leaf)

        def nested(node_id):
            node = tree.nodes[node_id]
            if node["kind"] == "leaf":
                return {"kind": "leaf", "outcome": node["outcome"]}
            return {
                "kind": "split",
                "feature": node["feature"],
                "comparator": node["comparator"],
                "value": node["value"],
                "left": nested(node["left"]),
                "right": nested(node["right"]),
            }

        if nested(tree.root) != expected:
            mismatches += 1
    elapsed = time.monotonic() - started
    ok = mismatches == 0 and elapsed < 30
    report("trainer-oracle equivalence", ok, f"200 datasets, {mismatches} mismatches, {elapsed:.1f}s")


# -- criterion: ledger integrity -------------------------------------------------


def test_ledger_integrity(tmp_path):
    started = time.monotonic()
    run_all(str(tmp_path / "all"))
    ledger_path = tmp_path / "all" / "ledger.jsonl"
    clean = Ledger(ledger_path, clock=Clock("simulated"))
    base_ok = clean.verify_chain().valid and clean.verify_head().valid

    from hada.ledger import verify_stored_chain

    raw = ledger_path.read_bytes()
    lines = raw.split(b"\n")
    entry_count = len(clean)
    rng = random.Random(77)
    detected = 0
    trials = 100
    for _ in range(trials):
        index = rng.randrange(entry_count)
        line = bytearray(lines[index])
        position = rng.randrange(len(line))
        mask = rng.randint(1, 255)
        line[position] ^= mask
        mutated = lines[:index] + [bytes(line)] + lines[index + 1:]
        ledger_path.write_bytes(b"\n".join(mutated))
        result = verify_stored_chain(ledger_path)
        if not result.valid and result.bad_index == index:
            detected += 1
        ledger_path.write_bytes(raw)
    elapsed = time.monotonic() - started
    ok = base_ok and detected == trials and elapsed < 10
    report(
        "ledger integrity",
        ok,
        f"chain valid after full suite ({entry_count} entries); "
        f"{detected}/{trials} byte-flips detected at the correct index, {elapsed:.1f}s",
    )


# -- criterion: RACI soundness -------------------------------------------------


EXPECTED_DUTIES = {
    "set-quarterly-targets": {"cco": "AR", "business-manager": "I", "data-scientist": "I",
                              "customer": "", "audit-manager": "I", "value-ethics-manager": "I", "hada": "I"},
    "set-optimization-target": {"cco": "A", "business-manager": "R", "data-scientist": "I",
                                "customer": "", "audit-manager": "", "value-ethics-manager": "", "hada": "I"},
    "optimize-ai-tools": {"cco": "I", "business-manager": "C", "data-scientist": "AR",
                          "customer": "", "audit-manager": "", "value-ethics-manager": "", "hada": "I"},
    "approve-deployment": {"cco": "I", "business-manager": "AR", "data-scientist": "C",
                           "customer": "", "audit-manager": "I", "value-ethics-manager": "I", "hada": "C"},
    "individual-loan-decision": {"cco": "", "business-manager": "A", "data-scientist": "",
                                 "customer": "C", "audit-manager": "", "value-ethics-manager": "", "hada": "R"},
    "audit-decision": {"cco": "I", "business-manager": "I", "data-scientist": "C",
                       "customer": "I", "audit-manager": "AR", "value-ethics-manager": "I", "hada": "C"},
    "handle-ethics-concern": {"cco": "I", "business-manager": "I", "data-scientist": "C",
                              "customer": "", "audit-manager": "I", "value-ethics-manager": "AR", "hada": "C"},
    "create-work-assignments": {"cco": "I", "business-manager": "C", "data-scientist": "C",
                                "customer": "I", "audit-manager": "C", "value-ethics-manager": "C", "hada": "AR"},
}


def test_raci_soundness():
    started = time.monotonic()
    matrix = RaciMatrix.load(bundled_matrix_path())
    cells = 0
    bad: list[str] = []
    for activity, row in EXPECTED_DUTIES.items():
        for role, letters in row.items():
            cells += 1
            if matrix.assignment(role, activity) != frozenset(letters):
                bad.append(f"{role}/{activity} duty mismatch")
                continue
            auth = matrix.authorize(role, activity, "perform")
            should_allow = bool(set(letters) & {"R", "A"})
            if auth.allowed != should_allow:
                bad.append(f"{role}/{activity} allow mismatch")
            if not auth.allowed and not auth.accountable:
                bad.append(f"{role}/{activity} denial lacks accountable role")
            if not auth.allowed:
                try:
                    matrix.require(role, activity)
                    bad.append(f"{role}/{activity} require() did not deny")
                except HadaError as exc:
                    if exc.details.get("accountable") not in row or "A" not in row[exc.details["accountable"]]:
                        bad.append(f"{role}/{activity} denial names wrong accountable role")
    elapsed = time.monotonic() - started
    ok = cells == 56 and not bad and elapsed < 1
    report("RACI soundness", ok, f"{cells} cells exhaustively checked, {len(bad)} mismatches, {elapsed:.2f}s")


# -- criterion: watchlist gate -------------------------------------------------


def test_watchlist_gate(tmp_path):
    started = time.monotonic()
    runner = ScenarioRunner(str(tmp_path / "flag"))
    try:
        for script in load_scripts()[:5]:
            result = runner.run_script(script)
            assert result.ok
        catalog = runner.runtime.catalog
        # Direct approval of a ZIP-using version must fail post-remediation.
        from hada.loan.engine import load_fixture_tree

        tree = load_fixture_tree("1.1")
        catalog.register_version(
            "getLoanDecision", "8.1", tree.feature_list, tree.to_dict(),
            {"accuracy": 0.9, "expected_loss_proxy": 1.0, "approval_rate": 0.4}, "data-scientist",
        )
        ticket = [t for t in catalog.list_tickets(state="awaiting-approval", kind="deployment")][-1]
        direct_blocked = False
        try:
            catalog.approve_deployment(ticket.ticket_id, "approve", "business-manager")
        except HadaError as exc:
            direct_blocked = exc.code == "watchlist-violation" and "ZIP_Code" in exc.details["attributes"]

        # The gated transition is *entry* into production: a version whose
        # feature list intersects the live watchlist must never be promoted.
        # (Flagging an attribute a production model already uses keeps it
        # live and opens a retrain ticket; that path is separately asserted
        # by the flagship remediation scenario.)
        rng = random.Random(11)
        version_counter = 0
        gate_violations = 0
        promotions = 0
        for _ in range(1000):
            roll = rng.random()
            try:
                if roll < 0.4:
                    version_counter += 1
                    features = rng.sample(
                        ["CreditHistory", "ApplicantIncome", "ZIP_Code", "LoanAmount", "PropertyArea"],
                        k=rng.randint(1, 3),
                    )
                    catalog.register_version(
                        "getLoanDecision", f"9.{version_counter}", features, tree.to_dict(),
                        {"accuracy": 0.5, "expected_loss_proxy": 1.0, "approval_rate": 0.5}, "data-scientist",
                    )
                elif roll < 0.8:
                    waiting = catalog.list_tickets(state="awaiting-approval", kind="deployment")
                    if waiting:
                        chosen = rng.choice(waiting)
                        decision = rng.choice(["approve", "reject"])
                        catalog.approve_deployment(chosen.ticket_id, decision, "business-manager")
                        if decision == "approve":
                            promotions += 1
                            promoted = catalog.get_version(*chosen.links[0].split("@"))
                            if set(promoted.feature_list) & catalog.active_watchlist():
                                gate_violations += 1
                elif roll < 0.9:
                    catalog.flag_attribute(rng.choice(["PropertyArea", "LoanAmount"]), "test", "value-ethics-manager")
                else:
                    catalog.clear_attribute(rng.choice(["PropertyArea", "LoanAmount"]), "test", "value-ethics-manager")
            except HadaError:
                pass
            if len(catalog.list_versions(status="production")) > 1:
                gate_violations += 1
        elapsed = time.monotonic() - started
        ok = direct_blocked and promotions > 20 and gate_violations == 0 and elapsed < 60
        report(
            "watchlist gate",
            ok,
            f"direct approval blocked naming ZIP_Code: {direct_blocked}; "
            f"{gate_violations} gate violations across 1000 interleavings ({promotions} promotions), {elapsed:.1f}s",
        )
    finally:
        runner.close()


# -- criterion: crash recovery -------------------------------------------------


def test_crash_recovery(tmp_path):
    started = time.monotonic()
    scripts = load_scripts()[:5]
    diffs = []
    for prefix_len in range(1, len(scripts) + 1):
        data_dir = tmp_path / f"prefix{prefix_len}"
        runner = ScenarioRunner(str(data_dir))
        try:
            for script in scripts[:prefix_len]:
                result = runner.run_script(script)
                assert result.ok, script.scenario_id
            before = runner.runtime.snapshot()
        finally:
            runner.close(cleanup=False)
        reborn = Runtime(RuntimeConfig(clock_mode="simulated", data_dir=str(data_dir)))
        try:
            after = reborn.snapshot()
        finally:
            reborn.close()
        if before != after:
            diffs.append(prefix_len)
    elapsed = time.monotonic() - started
    ok = not diffs and elapsed < 120
    report(
        "crash recovery",
        ok,
        f"5 scenario prefixes restarted; snapshot diffs at prefixes {diffs or 'none'}, {elapsed:.1f}s",
    )
