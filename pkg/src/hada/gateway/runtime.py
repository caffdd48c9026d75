"""Runtime assembly: one object that wires every component together.

Startup replays the ledger into the catalogues, restores id streams and the
simulated clock from the head checkpoint, registers the seven agent cards
and the tool manifests, and (on a fresh store only) seeds the baseline
fixtures: default watchlist, baseline objectives and KPI binding, and the
already-running decision model as version 1.0 in production.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from ..a2a.push import PushDispatcher
from ..a2a.registry import AgentRegistry
from ..a2a.store import TaskStore
from ..agents.controller import Controller, Services
from ..agents.crm import CrmStore, lookup_manifest, update_manifest
from ..agents.llm import LlmIntentResolver, http_client
from ..agents.profiles import AgentMemory, build_profiles
from ..catalog import Catalog
from ..clock import Clock
from ..crypto import CardSigner
from ..errors import HadaError
from ..identifiers import IdFactory
from ..ledger import Ledger
from ..loan.engine import LoanEngine, load_fixture_tree, tool_manifest, training_manifest
from ..loan.metrics import compute_validation_metrics
from ..loan.schema import ingest_csv
from ..policy import PolicyService, RaciMatrix
from ..toolbus import InvocationContext, ToolBus, ToolManifest
from .auth import TokenStore
from .config import RuntimeConfig

log = logging.getLogger(__name__)


class Runtime:
    def __init__(self, config: RuntimeConfig, push_transport: Any = None, llm_client: Any = None) -> None:
        config.validate()
        self.config = config
        self.clock = Clock(config.clock_mode)
        self.ids = IdFactory(decision_seed=config.decision_seed)
        self.ledger = Ledger(config.ledger_path, clock=self.clock)

        saved = self.ledger.load_runtime_state()
        if saved.get("ids"):
            self.ids.restore(saved["ids"])
        for entry in self.ledger.iter_kind("decision"):
            self.ids.decisions.observe(entry.payload["decision_id"])
        for entry in self.ledger.iter_kind("invocation"):
            self.ids.observe(entry.payload["invocation_id"])
        if self.ledger.entries():
            self.clock.advance_to(self.ledger.entries()[-1].timestamp)

        self.policy = PolicyService(RaciMatrix.load(config.matrix_path))
        self.bus: ToolBus | None = None
        self.catalog = Catalog(
            self.ledger,
            self.ids,
            self.clock,
            self.policy,
            notifier=None,  # attached once the controller exists
            tool_exists=lambda tool_id: self.bus is not None and tool_id in self.bus,
        )

        self.signer = CardSigner.from_seed(config.card_key_seed)
        self.registry = AgentRegistry(self.signer.verifier())
        self.memory = AgentMemory(config.memory_path)
        self.profiles = build_profiles(self.policy.matrix, self.signer, config.base_url, self.memory)
        for profile in self.profiles.values():
            self.registry.register(profile.card)

        self.store = TaskStore(self.clock, self.ids, known_agent=lambda a: a in self.registry)
        self.push = PushDispatcher(transport=push_transport)
        self.store.add_push_hook(self.push.hook)

        self.engine = LoanEngine(self.catalog, self.ledger, self.policy, self.ids, self.clock)
        self.crm = CrmStore(config.crm_file)
        self.bus = ToolBus(
            self.policy,
            self.ledger,
            self.ids,
            self.clock,
            watchlist=self.catalog.active_watchlist,
            ethics_hook=self._on_watchlist_hit,
        )
        self._register_tools()

        from ..ethics import EthicsEngine

        self.ethics = EthicsEngine(
            self.catalog,
            self.policy,
            self.ids,
            source_exists=lambda ref: ref in self.store or self.bus.invocation_exists(ref),
        )

        services = Services(
            clock=self.clock,
            ids=self.ids,
            ledger=self.ledger,
            catalog=self.catalog,
            policy=self.policy,
            ethics=self.ethics,
            bus=self.bus,
            engine=self.engine,
            crm=self.crm,
            store=self.store,
            registry=self.registry,
            profiles=self.profiles,
            runtime_config={"rate_card": config.rate_card},
        )
        resolver = None
        if llm_client is not None:
            resolver = LlmIntentResolver(llm_client)
        elif config.llm is not None:
            resolver = LlmIntentResolver(http_client(config.llm))
        self.controller = Controller(services, llm_resolver=resolver)
        self.services = services
        self.catalog.set_notifier(self.controller.notify)

        self.tokens = TokenStore(config.token_file, self.clock)
        self.ledger.runtime_state_provider = self._runtime_state

        if len(self.ledger) == 0 and config.bootstrap_fixtures:
            self._bootstrap()

    # -- wiring helpers ------------------------------------------------------

    def _runtime_state(self) -> dict[str, Any]:
        return {"ids": self.ids.snapshot()}

    def _on_watchlist_hit(self, attribute: str, invocation_id: str, caller: str) -> None:
        self.ethics.raise_trigger(
            cause="watchlist-hit",
            subject_attribute=attribute,
            source=invocation_id,
            raised_by=caller,
            detail=f"Watchlisted attribute '{attribute}' passed through invocation {invocation_id}.",
        )

    def _register_tools(self) -> None:
        decision = ToolManifest.from_dict(tool_manifest())
        if self.config.loan_engine_mode != "embedded":
            decision.endpoint = self.config.loan_engine_mode.rstrip("/") + "/getLoanDecision/production"
            decision.transport = "http"
        self.bus.register_tool(decision)
        self.bus.register_tool(ToolManifest.from_dict(training_manifest()))
        self.bus.register_tool(ToolManifest.from_dict(lookup_manifest()))
        self.bus.register_tool(ToolManifest.from_dict(update_manifest()))

        self.bus.bind_local("local:loan-engine/decision", self._handle_decision)
        self.bus.bind_local("local:loan-engine/train", self._handle_training)
        self.bus.bind_local("local:crm/lookup", self._handle_crm_lookup)
        self.bus.bind_local("local:crm/update", self._handle_crm_update)

    def _handle_decision(self, args: dict[str, Any], ctx: InvocationContext) -> dict[str, Any]:
        return self.engine.serve_decision("production", args, ctx.caller, ctx.task_id)

    def _handle_training(self, args: dict[str, Any], ctx: InvocationContext) -> dict[str, Any]:
        exclude = [f for f in (args.get("exclude") or "").split(",") if f]
        dataset = holdout = None
        sample = self._sample_dataset()
        holdout = sample
        if args.get("fixture") is None:
            dataset_path = args.get("dataset")
            if dataset_path:
                dataset, _ = ingest_csv(dataset_path)
            else:
                dataset = sample
        return self.engine.run_training_job(
            actor=ctx.caller,
            version=args["version"],
            exclude=exclude,
            max_depth=int(args.get("max_depth") or 3),
            fixture=args.get("fixture"),
            dataset=dataset,
            holdout=holdout,
        )

    def _handle_crm_lookup(self, args: dict[str, Any], ctx: InvocationContext) -> dict[str, Any]:
        record = self.crm.get(args["customer_id"])
        return {"customer_id": args["customer_id"], **record}

    def _handle_crm_update(self, args: dict[str, Any], ctx: InvocationContext) -> dict[str, Any]:
        value: Any = args["value"]
        if args["field"] in ("ApplicantIncome", "CoapplicantIncome", "LoanAmount", "LoanTerm", "Dependents"):
            value = float(value)
        record = self.crm.update(args["customer_id"], args["field"], value)
        return {"customer_id": args["customer_id"], **record}

    _sample_cache: Any = None

    def _sample_dataset(self):
        if Runtime._sample_cache is None:
            from ..loan.engine import bundled_sample_path

            Runtime._sample_cache = ingest_csv(bundled_sample_path())[0]
        return Runtime._sample_cache

    # -- bootstrap ------------------------------------------------------------

    def _bootstrap(self) -> None:
        """Seed the baseline world on a fresh ledger.

        Genesis seeding is privileged: it bypasses duty checks (there is no
        acting stakeholder yet) and creates no tickets or notifications.
        """
        catalog = self.catalog
        catalog.set_notifier(None)
        try:
            catalog.seed_objective(
                horizon="yearly",
                statement="Grow the lending portfolio within the approved risk appetite",
                key_results=[{"kr_id": "kr1", "metric": "portfolio-growth", "direction": "maximize", "target": 0.08}],
                owner_role="cco",
            )
            catalog.seed_objective(
                horizon="quarterly",
                statement="Maximise new-customer acquisition",
                key_results=[{"kr_id": "kr1", "metric": "acquisition-rate", "direction": "maximize", "target": 0.15}],
                owner_role="cco",
            )
            bm_objective = catalog.seed_objective(
                horizon="quarterly",
                statement="Grow short-term lending through new-customer acquisition",
                key_results=[{"kr_id": "kr1", "metric": "acquisition-rate", "direction": "maximize", "target": 0.15}],
                owner_role="business-manager",
            )
            defaults = json.loads(Path(self.config.watchlist_file).read_text())
            for item in defaults.get("attributes", []):
                catalog.seed_watchlist(item["attribute"], item["reason"], "value-ethics-manager")
            baseline = load_fixture_tree("1.0")
            metrics = compute_validation_metrics(baseline, self._sample_dataset())
            catalog.seed_version(
                "getLoanDecision",
                "1.0",
                baseline.feature_list,
                baseline.to_dict(),
                metrics,
                created_by="data-scientist",
                status="production",
            )
            catalog.seed_binding(
                "getLoanDecision", bm_objective.objective_id, "acquisition-rate", 1.0, "business-manager"
            )
        finally:
            catalog.set_notifier(self.controller.notify)

    # -- lifecycle ------------------------------------------------------------

    def snapshot(self) -> dict[str, Any]:
        return {
            "catalog": self.catalog.snapshot(),
            "ledger_len": len(self.ledger),
            "ledger_head": self.ledger.head_hash(),
        }

    def verify(self) -> dict[str, Any]:
        return {
            "chain": self.ledger.verify_chain().to_dict(),
            "head": self.ledger.verify_head().to_dict(),
        }

    def close(self) -> None:
        self.push.close()


def start(config: RuntimeConfig, **kwargs: Any) -> Runtime:
    """Build a runtime; refuses to start over a corrupt ledger."""
    try:
        return Runtime(config, **kwargs)
    except HadaError:
        raise
    except Exception as exc:  # noqa: BLE001 - surface as a startup failure
        raise HadaError("storage-failure", f"startup failed: {exc}") from exc
