"""Operator CLI.

Local mode works directly on HADA_DATA_DIR (or an ephemeral runtime);
when HADA_ADDR is set, state-reading subcommands talk to the running
service over HTTP instead (HADA_TOKEN supplies the role credential).
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path
from typing import Any

import click

from .errors import HadaError
from .gateway.config import RuntimeConfig
from .gateway.runtime import Runtime
from .loan.schema import ingest_csv
from .loan.tree import TrainingConfig, serialize_tree, train
from .loan.metrics import compute_validation_metrics
from .policy import RaciMatrix


def _remote() -> str | None:
    addr = os.environ.get("HADA_ADDR")
    if not addr:
        return None
    return addr if addr.startswith("http") else f"http://{addr}"


def _http(method: str, path: str, **kwargs: Any) -> Any:
    import httpx

    base = _remote()
    token = os.environ.get("HADA_TOKEN", "dev-hada")
    headers = {"Authorization": f"Bearer {token}"}
    response = httpx.request(method, f"{base}{path}", headers=headers, timeout=30.0, **kwargs)
    if response.status_code >= 400:
        click.echo(f"error {response.status_code}: {response.text}", err=True)
        sys.exit(1)
    return response


def _local_runtime() -> Runtime:
    config = RuntimeConfig.from_env()
    if config.data_dir is None:
        config.clock_mode = "simulated"
    return Runtime(config)


@click.group()
def main() -> None:
    """Governed credit-decision runtime: serve it, script it, audit it."""


@main.command()
@click.option("--config", "config_file", type=click.Path(exists=True), default=None, help="JSON config file")
@click.option("--addr", default=None, help="listen address host:port")
def serve(config_file: str | None, addr: str | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .gateway.http import build_app

    env = dict(os.environ)
    if config_file:
        env["HADA_CONFIG"] = config_file
    config = RuntimeConfig.from_env(env)
    if addr:
        config.addr = addr
    runtime = Runtime(config)
    app = build_app(runtime)
    host, _, port = config.addr.partition(":")
    click.echo(f"hada listening on {config.addr} (data dir: {config.data_dir or 'in-memory'})")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080), log_level="warning")


@main.group()
def scenario() -> None:
    """Replay scripted governance scenarios."""


@scenario.command("run")
@click.argument("scenario_id")
@click.option("--data-dir", default=None, help="keep transcripts in this directory")
def scenario_run(scenario_id: str, data_dir: str | None) -> None:
    """Replay the ordered scenario prefix ending at SCENARIO_ID."""
    from .scenarios import run_scenario

    try:
        result, prefix = run_scenario(scenario_id, data_dir)
    except HadaError as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(2)
    for step in result.steps:
        click.echo(f"[{step.actor}] {step.utterance}")
        click.echo(f"[hada] {step.reply}")
        for failure in step.failures:
            click.echo(f"  !! {failure}")
    click.echo(f"\nscenario {scenario_id}: {'PASS' if result.ok else 'FAIL'} "
               f"({len(prefix) - 1} prerequisite scenario(s) replayed first)")
    sys.exit(0 if result.ok else 1)


@scenario.command("run-all")
@click.option("--data-dir", default=None, help="keep transcripts and the coverage report here")
@click.option("--matrix", "matrix_path", default=None, help="override duty-matrix file")
def scenario_run_all(data_dir: str | None, matrix_path: str | None) -> None:
    """Run all 36 scripted dialogues and print the coverage matrix."""
    from .scenarios import run_all

    report = run_all(data_dir, matrix_path=matrix_path)
    click.echo(report.coverage_table())
    for result in report.results:
        if not result.ok:
            click.echo(f"FAIL {result.scenario_id}")
            for step in result.steps:
                for failure in step.failures:
                    click.echo(f"  - {failure}")
    sys.exit(0 if report.ok else 1)


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True), help="training CSV")
@click.option("--exclude", default="", help="comma-separated features to exclude")
@click.option("--max-depth", default=3, show_default=True)
@click.option("--min-samples-leaf", default=1, show_default=True)
@click.option("--out", "out_path", default=None, help="write the serialized tree here")
def train_cmd(data_path: str, exclude: str, max_depth: int, min_samples_leaf: int, out_path: str | None) -> None:
    """Train a decision tree from a CSV and print validation metrics."""
    dataset, report = ingest_csv(data_path)
    click.echo(f"ingested {report.row_count} rows ({len(report.skipped_rows)} skipped)")
    config = TrainingConfig(
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        excluded_features=[f for f in exclude.split(",") if f],
    )
    tree = train(dataset, config)
    metrics = compute_validation_metrics(tree, dataset)
    click.echo(f"features: {', '.join(tree.feature_list)}")
    for key in ("accuracy", "false_approval_rate", "false_rejection_rate", "expected_loss_proxy"):
        click.echo(f"{key}: {metrics[key]:.4f}")
    blob = serialize_tree(tree)
    if out_path:
        Path(out_path).write_bytes(blob)
        click.echo(f"tree written to {out_path}")
    else:
        click.echo(blob.decode())


# click reserves ``train`` for the function name above
main.add_command(train_cmd, name="train")


@main.command()
@click.option("--model", "model_id", default="production", show_default=True)
@click.option("--input", "input_path", required=True, type=click.Path(exists=True), help="application JSON")
@click.option("--as-role", default="hada", show_default=True)
@click.option("--audit-pin", is_flag=True, help="pinned audit replay (non-production version)")
def score(model_id: str, input_path: str, as_role: str, audit_pin: bool) -> None:
    """Score one application against a catalogued model version."""
    application = json.loads(Path(input_path).read_text())
    if _remote():
        body = dict(application)
        if audit_pin:
            body["audit_pin"] = True
        response = _http("POST", f"/getLoanDecision/{model_id}", json=body)
        click.echo(json.dumps(response.json(), indent=2))
        return
    runtime = _local_runtime()
    try:
        result = runtime.engine.serve_decision(model_id, application, as_role, audit_pin=audit_pin)
        click.echo(json.dumps(result, indent=2))
    finally:
        runtime.close()


@main.group()
def ledger() -> None:
    """Inspect and verify the decision ledger."""


@ledger.command("verify")
def ledger_verify() -> None:
    if _remote():
        outcome = _http("POST", "/ledger/verify").json()
    else:
        runtime = _local_runtime()
        try:
            outcome = runtime.verify()
        finally:
            runtime.close()
    chain, head = outcome["chain"], outcome["head"]
    if chain["valid"] and head["valid"]:
        click.echo("valid")
        sys.exit(0)
    click.echo(f"INVALID: chain={chain} head={head}")
    sys.exit(1)


@ledger.command("export")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)
@click.option("--decision", default=None, help="export a single decision's audit report")
@click.option("--out", "out_path", default=None)
def ledger_export(fmt: str, decision: str | None, out_path: str | None) -> None:
    if _remote():
        params = {"format": fmt}
        if decision:
            params["decision"] = decision
        response = _http("GET", "/ledger/export", params=params)
        payload = response.text
    else:
        runtime = _local_runtime()
        try:
            if fmt == "text":
                payload = runtime.ledger.export_text(decision)
            else:
                payload = json.dumps(runtime.ledger.export_json(decision), indent=2)
        finally:
            runtime.close()
    if out_path:
        Path(out_path).write_text(payload)
        click.echo(f"written to {out_path}")
    else:
        click.echo(payload)


@main.group()
def catalog() -> None:
    """Browse the governance catalogues."""


@catalog.command("list")
@click.argument("what", type=click.Choice(["objectives", "models", "watchlist", "bindings", "tools"]))
@click.option("--state", default=None)
def catalog_list(what: str, state: str | None) -> None:
    if _remote():
        path = {
            "objectives": "/catalog/objectives",
            "models": "/catalog/models",
            "watchlist": "/catalog/watchlist",
            "bindings": "/catalog/kpi-bindings",
            "tools": "/tools",
        }[what]
        params = {"state": state} if state and what == "models" else None
        click.echo(json.dumps(_http("GET", path, params=params).json(), indent=2))
        return
    runtime = _local_runtime()
    try:
        if what == "objectives":
            rows = [o.to_dict() for o in runtime.catalog.list_objectives(state)]
        elif what == "models":
            rows = [v.to_dict(with_tree=False) for v in runtime.catalog.list_versions(status=state)]
        elif what == "watchlist":
            rows = sorted(runtime.catalog.active_watchlist())
        elif what == "bindings":
            rows = [b.to_dict() for b in runtime.catalog.active_bindings("getLoanDecision")]
        else:
            rows = [m.to_dict() for m in runtime.bus.list_tools()]
        click.echo(json.dumps(rows, indent=2))
    finally:
        runtime.close()


@catalog.command("show")
@click.argument("tool")
@click.argument("version")
def catalog_show(tool: str, version: str) -> None:
    if _remote():
        click.echo(json.dumps(_http("GET", f"/catalog/models/{tool}/{version}").json(), indent=2))
        return
    runtime = _local_runtime()
    try:
        click.echo(json.dumps(runtime.catalog.get_version(tool, version).to_dict(with_tree=False), indent=2))
    finally:
        runtime.close()


@main.group()
def tickets() -> None:
    """Work assignments."""


@tickets.command("list")
@click.option("--state", default=None)
@click.option("--kind", default=None)
def tickets_list(state: str | None, kind: str | None) -> None:
    if _remote():
        params = {k: v for k, v in (("state", state), ("kind", kind)) if v}
        click.echo(json.dumps(_http("GET", "/tickets", params=params).json(), indent=2))
        return
    runtime = _local_runtime()
    try:
        rows = [t.to_dict() for t in runtime.catalog.list_tickets(state, kind)]
        click.echo(json.dumps(rows, indent=2))
    finally:
        runtime.close()


@main.group()
def matrix() -> None:
    """Duty-matrix tooling."""


@matrix.command("validate")
@click.argument("path", type=click.Path(exists=True))
def matrix_validate(path: str) -> None:
    try:
        loaded = RaciMatrix.load(path)
    except HadaError as exc:
        click.echo(f"INVALID: {exc.message}")
        sys.exit(1)
    click.echo(f"valid: {len(loaded.activities)} activities x {len(loaded.roles)} roles")


if __name__ == "__main__":
    main()
