"""Scenario harness: scripted end-to-end dialogues with checked side effects."""

from .runner import RunAllReport, ScenarioRunner, load_scripts, run_all, run_scenario

__all__ = ["RunAllReport", "ScenarioRunner", "load_scripts", "run_all", "run_scenario"]
