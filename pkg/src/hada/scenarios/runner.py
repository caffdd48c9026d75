"""Scenario execution, transcripts, and the stakeholder/objective coverage matrix.

Scripts run strictly in order against one embedded runtime with a simulated
clock and seeded id streams, so two runs from a clean state produce
byte-identical transcripts. ``run_scenario`` replays the ordered prefix up to
the requested script (state is cumulative, as in the source material);
``run_all`` executes all 36 dialogues and emits the coverage matrix.
"""

from __future__ import annotations

import json
import re
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from ..errors import HadaError
from ..gateway.config import RuntimeConfig
from ..gateway.runtime import Runtime
from .checks import CheckResult, run_check

STEP_TIMEOUT_SECONDS = 15.0

OBJECTIVES = {
    "O1": "conversational control across planning horizons",
    "O2": "target and value alignment with audit trail",
    "O3": "modular agent/tool integration",
    "O4": "stakeholder alignment across time scales",
    "O5": "auditability and lineage reproduction",
    "O6": "framework-agnostic operation (no LLM provider required)",
}

STAKEHOLDER_ROLES = [
    "cco",
    "business-manager",
    "data-scientist",
    "customer",
    "audit-manager",
    "value-ethics-manager",
]

# Cells with no demonstrable interaction for that role; documented in
# docs/scenarios.md.
NOT_APPLICABLE = {
    ("cco", "O3"),
    ("customer", "O4"),
    ("audit-manager", "O2"),
    ("audit-manager", "O3"),
    ("audit-manager", "O4"),
    ("value-ethics-manager", "O3"),
}


@dataclass
class ScenarioScript:
    scenario_id: str
    title: str
    steps: list[dict[str, Any]]
    requires: list[str] = field(default_factory=list)
    coverage: list[dict[str, Any]] = field(default_factory=list)
    description: str = ""


@dataclass
class StepResult:
    index: int
    actor: str
    utterance: str
    reply: str
    task_id: str
    task_state: str
    ok: bool
    failures: list[str] = field(default_factory=list)
    evidence: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "actor": self.actor,
            "utterance": self.utterance,
            "reply": self.reply,
            "task_id": self.task_id,
            "task_state": self.task_state,
            "ok": self.ok,
            "failures": self.failures,
        }


@dataclass
class ScenarioResult:
    scenario_id: str
    title: str
    steps: list[StepResult] = field(default_factory=list)
    evidence: list[dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.steps) and bool(self.steps)

    def transcript(self) -> list[dict[str, Any]]:
        return [s.to_dict() for s in self.steps]


@dataclass
class CoverageCell:
    role: str
    objective: str
    applicable: bool
    evidence: list[dict[str, Any]] = field(default_factory=list)
    satisfied: bool = False


@dataclass
class RunAllReport:
    results: list[ScenarioResult]
    cells: dict[tuple[str, str], CoverageCell]
    exercised_activities: set[str]
    scripted_only: bool

    @property
    def dialogue_count(self) -> int:
        return len(self.results)

    @property
    def all_steps_passed(self) -> bool:
        return all(r.ok for r in self.results)

    @property
    def unsatisfied_cells(self) -> list[CoverageCell]:
        return [c for c in self.cells.values() if c.applicable and not c.satisfied]

    @property
    def ok(self) -> bool:
        return self.all_steps_passed and not self.unsatisfied_cells

    def coverage_table(self) -> str:
        header = "role".ljust(24) + "".join(o.ljust(6) for o in OBJECTIVES)
        lines = [header, "-" * len(header)]
        for role in STAKEHOLDER_ROLES:
            row = role.ljust(24)
            for objective in OBJECTIVES:
                cell = self.cells[(role, objective)]
                mark = "n/a" if not cell.applicable else ("yes" if cell.satisfied else "NO")
                row += mark.ljust(6)
            lines.append(row)
        satisfied = sum(1 for c in self.cells.values() if c.applicable and c.satisfied)
        applicable = sum(1 for c in self.cells.values() if c.applicable)
        pct = 100.0 * satisfied / applicable if applicable else 0.0
        lines.append(f"coverage: {satisfied}/{applicable} applicable cells satisfied ({pct:.0f}%)")
        lines.append(f"dialogues: {self.dialogue_count}; steps passed: {self.all_steps_passed}")
        lines.append(f"activities exercised: {', '.join(sorted(self.exercised_activities))}")
        return "\n".join(lines)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dialogues": self.dialogue_count,
            "all_steps_passed": self.all_steps_passed,
            "scripted_only": self.scripted_only,
            "exercised_activities": sorted(self.exercised_activities),
            "cells": [
                {
                    "role": c.role,
                    "objective": c.objective,
                    "applicable": c.applicable,
                    "satisfied": c.satisfied,
                    "evidence": c.evidence,
                }
                for c in self.cells.values()
            ],
            "scenarios": [
                {"scenario_id": r.scenario_id, "ok": r.ok, "steps": [s.to_dict() for s in r.steps]}
                for r in self.results
            ],
        }


def load_scripts() -> list[ScenarioScript]:
    """All scripts in execution order: five flagship files, then variants."""
    base = resources.files("hada.scenarios").joinpath("data")
    scripts: list[ScenarioScript] = []
    flagship = sorted(p.name for p in base.iterdir() if p.name.endswith(".yaml") and p.name != "variants.yaml")
    for name in flagship:
        raw = yaml.safe_load(base.joinpath(name).read_text())
        scripts.append(_parse_script(raw, name))
    variants = yaml.safe_load(base.joinpath("variants.yaml").read_text())
    for raw in variants.get("dialogues", []):
        scripts.append(_parse_script(raw, "variants.yaml"))
    return scripts


def _parse_script(raw: dict[str, Any], source: str) -> ScenarioScript:
    if not raw.get("scenario_id") or not raw.get("steps"):
        raise HadaError("fixture-missing", f"scenario in {source} lacks id or steps")
    for step in raw["steps"]:
        if "say" not in step and "action" not in step:
            raise HadaError("fixture-missing", f"step in {raw['scenario_id']} has neither say nor action")
        if not step.get("actor"):
            raise HadaError("fixture-missing", f"step in {raw['scenario_id']} lacks an actor")
    return ScenarioScript(
        scenario_id=raw["scenario_id"],
        title=raw.get("title", raw["scenario_id"]),
        steps=raw["steps"],
        requires=raw.get("requires", []),
        coverage=raw.get("coverage", []),
        description=raw.get("description", ""),
    )


class ScenarioRunner:
    """Owns one embedded runtime and executes scripts against it."""

    def __init__(self, data_dir: str | None = None, matrix_path: str | None = None) -> None:
        self._temp_dir = None
        if data_dir is None:
            self._temp_dir = tempfile.mkdtemp(prefix="hada-scenarios-")
            data_dir = self._temp_dir
        config = RuntimeConfig(clock_mode="simulated", data_dir=data_dir)
        if matrix_path is not None:
            config.matrix_path = matrix_path
        self.runtime = Runtime(config)
        self.data_dir = Path(data_dir)

    def close(self, cleanup: bool = True) -> None:
        self.runtime.close()
        if self._temp_dir and cleanup:
            shutil.rmtree(self._temp_dir, ignore_errors=True)

    # -- execution ------------------------------------------------------------

    def run_script(self, script: ScenarioScript) -> ScenarioResult:
        result = ScenarioResult(scenario_id=script.scenario_id, title=script.title)
        current_task_id: str | None = None
        for index, step in enumerate(script.steps):
            step_result = self._run_step(index, step, current_task_id)
            result.steps.append(step_result)
            result.evidence.extend(step_result.evidence)
            if step_result.task_id:
                current_task_id = step_result.task_id
            if not step_result.ok:
                break  # state has diverged; remaining steps would mislead
        return result

    def _run_step(self, index: int, step: dict[str, Any], current_task_id: str | None) -> StepResult:
        actor = step["actor"]
        failures: list[str] = []
        evidence: list[dict[str, Any]] = []
        task_id = current_task_id if step.get("continue") else None
        reply = ""
        task_state = ""
        started = time.monotonic()

        for pre in step.get("precheck", []):
            outcome = run_check(self.runtime, {"task_id": task_id}, pre)
            evidence.extend(outcome.evidence)
            if not outcome.ok:
                failures.append(f"precheck: {outcome.detail}")

        if "action" in step:
            utterance = f"<action:{step['action']['op']}>"
            try:
                task_id = self._run_action(step["action"], actor, task_id)
                if step.get("expect_error"):
                    failures.append(f"expected error {step['expect_error']} but action succeeded")
            except HadaError as exc:
                if step.get("expect_error") != exc.code:
                    failures.append(f"action failed with {exc.code}: {exc.message}")
        else:
            utterance = step["say"]
            try:
                task, reply = self.runtime.controller.handle_utterance(
                    actor, utterance, task_id=task_id, customer_id=step.get("customer_id")
                )
                task_id = task.task_id
                task_state = task.state.value
            except HadaError as exc:
                failures.append(f"turn failed with {exc.code}: {exc.message}")

        if time.monotonic() - started > STEP_TIMEOUT_SECONDS:
            failures.append("step-timeout")

        pattern = step.get("expect_reply")
        if pattern and not re.search(pattern, reply, re.DOTALL):
            failures.append(f"reply {reply!r} does not match /{pattern}/")
        expected_state = step.get("expect_task_state")
        if expected_state and task_state != expected_state:
            failures.append(f"task state {task_state!r}, wanted {expected_state!r}")

        for effect in step.get("effects", []):
            outcome: CheckResult = run_check(self.runtime, {"task_id": task_id}, effect)
            evidence.extend(outcome.evidence)
            if not outcome.ok:
                failures.append(f"effect {effect.get('check')}: {outcome.detail}")

        return StepResult(
            index=index,
            actor=actor,
            utterance=utterance,
            reply=reply,
            task_id=task_id or "",
            task_state=task_state,
            ok=not failures,
            failures=failures,
            evidence=evidence,
        )

    def _run_action(self, action: dict[str, Any], actor: str, task_id: str | None) -> str | None:
        op = action["op"]
        if op == "bind_kpi":
            objective = self.runtime.catalog.active_objective("business-manager", "quarterly")
            if objective is None:
                raise HadaError("unknown-objective", "no active business-manager objective")
            self.runtime.catalog.bind_kpi(
                action["tool"], objective.objective_id, action["kpi"], float(action["weight"]), actor
            )
            return task_id
        if op == "cancel_task":
            if task_id is None:
                raise HadaError("unknown-task", "no task to cancel")
            self.runtime.store.cancel(task_id)
            return task_id
        if op == "verify_ledger":
            outcome = self.runtime.ledger.verify_chain()
            if not outcome.valid:
                raise HadaError("corrupt-ledger", f"invalid at {outcome.bad_index}")
            return task_id
        raise HadaError("fixture-missing", f"unknown scripted action {op!r}")

    # -- evidence ------------------------------------------------------------

    def resolve_evidence(self, pointer: dict[str, Any]) -> bool:
        try:
            if pointer["kind"] == "ledger":
                return 0 <= pointer["index"] < len(self.runtime.ledger)
            if pointer["kind"] == "ticket":
                self.runtime.catalog.get_ticket(pointer["id"])
                return True
            if pointer["kind"] == "decision":
                self.runtime.ledger.query_decision(pointer["id"])
                return True
        except HadaError:
            return False
        return False

    def exercised_activities(self) -> set[str]:
        """Duty-matrix activities evidenced by ledger entries."""
        activities: set[str] = set()
        for entry in self.runtime.ledger.entries():
            kind, payload = entry.kind, entry.payload
            if kind == "objective":
                owner = payload.get("objective", {}).get("owner_role")
                activities.add("set-quarterly-targets" if owner == "cco" else "set-optimization-target")
            elif kind == "kpi-binding":
                activities.add("set-optimization-target")
            elif kind == "version":
                if payload.get("action") == "register":
                    activities.add("optimize-ai-tools")
                elif payload.get("approval"):
                    activities.add("approve-deployment")
            elif kind == "decision":
                activities.add(payload.get("applied_policy", {}).get("activity", ""))
            elif kind in ("watchlist", "ethics-flag"):
                activities.add("handle-ethics-concern")
            elif kind == "ticket" and payload.get("action") == "create":
                activities.add("create-work-assignments")
        activities.discard("")
        return activities


def _persist(runner: ScenarioRunner, result: ScenarioResult) -> None:
    out = runner.data_dir / "transcripts"
    out.mkdir(exist_ok=True)
    (out / f"{result.scenario_id}.json").write_text(json.dumps(result.transcript(), indent=2))
    lines = [f"# {result.scenario_id}: {result.title}"]
    for step in result.steps:
        lines.append(f"[{step.actor}] {step.utterance}")
        lines.append(f"[hada] {step.reply}")
        if step.failures:
            lines.append(f"!! {'; '.join(step.failures)}")
    (out / f"{result.scenario_id}.txt").write_text("\n".join(lines) + "\n")


def run_scenario(scenario_id: str, data_dir: str | None = None) -> tuple[ScenarioResult, list[ScenarioResult]]:
    """Replay the ordered prefix ending at ``scenario_id`` on a clean runtime."""
    scripts = load_scripts()
    ids = [s.scenario_id for s in scripts]
    if scenario_id not in ids:
        raise HadaError("fixture-missing", f"unknown scenario '{scenario_id}' (known: {', '.join(ids)})")
    runner = ScenarioRunner(data_dir)
    prefix_results: list[ScenarioResult] = []
    try:
        for script in scripts:
            result = runner.run_script(script)
            prefix_results.append(result)
            _persist(runner, result)
            if script.scenario_id == scenario_id:
                return result, prefix_results
            if not result.ok:
                raise HadaError(
                    "fixture-missing",
                    f"prerequisite scenario '{script.scenario_id}' failed before '{scenario_id}'",
                )
    finally:
        runner.close(cleanup=data_dir is None)
    raise HadaError("fixture-missing", f"scenario '{scenario_id}' was not reached")


def run_all(data_dir: str | None = None, matrix_path: str | None = None) -> RunAllReport:
    scripts = load_scripts()
    runner = ScenarioRunner(data_dir, matrix_path=matrix_path)
    results: list[ScenarioResult] = []
    cells: dict[tuple[str, str], CoverageCell] = {
        (role, objective): CoverageCell(role, objective, (role, objective) not in NOT_APPLICABLE)
        for role in STAKEHOLDER_ROLES
        for objective in OBJECTIVES
    }
    try:
        for script in scripts:
            result = runner.run_script(script)
            results.append(result)
            _persist(runner, result)
            if not result.ok:
                continue
            for declaration in script.coverage:
                role = declaration["role"]
                for objective in declaration["objectives"]:
                    cell = cells[(role, objective)]
                    cell.evidence.extend(result.evidence)
        for cell in cells.values():
            resolved = [p for p in cell.evidence if runner.resolve_evidence(p)]
            cell.evidence = resolved[:8]
            cell.satisfied = cell.applicable and bool(resolved)
        report = RunAllReport(
            results=results,
            cells=cells,
            exercised_activities=runner.exercised_activities(),
            scripted_only=runner.runtime.config.llm is None,
        )
        out_dir = runner.data_dir
        (out_dir / "coverage.json").write_text(json.dumps(report.to_dict(), indent=2))
        (out_dir / "coverage.txt").write_text(report.coverage_table() + "\n")
        return report
    finally:
        runner.close(cleanup=data_dir is None)
