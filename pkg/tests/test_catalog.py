from __future__ import annotations

import random

import pytest

from hada.catalog import Catalog
from hada.errors import HadaError
from hada.ethics import EthicsEngine
from hada.ledger import Ledger
from hada.policy import PolicyService, RaciMatrix, bundled_matrix_path

TOY_TREE = {"format": "hada.tree/1", "nodes": [{"node_id": 0, "kind": "leaf", "outcome": "approved"}]}


@pytest.fixture
def policy() -> PolicyService:
    return PolicyService(RaciMatrix.load(bundled_matrix_path()))


@pytest.fixture
def catalog(clock, ids, policy) -> Catalog:
    ledger = Ledger(clock=clock)
    return Catalog(ledger, ids, clock, policy, tool_exists=lambda t: t == "getLoanDecision")


def seed_objective(catalog, owner="business-manager", actor="business-manager", statement="acquire new customers"):
    return catalog.set_objective(
        horizon="quarterly",
        statement=statement,
        key_results=[{"kr_id": "kr1", "metric": "acquisition-rate", "direction": "maximize", "target": 0.2}],
        owner_role=owner,
        actor=actor,
    )


# -- objectives ---------------------------------------------------------------


def test_objective_supersession(catalog):
    first = seed_objective(catalog)
    second = seed_objective(catalog, statement="minimise credit losses")
    assert catalog.objectives[first.objective_id].status == "superseded"
    assert catalog.objectives[first.objective_id].superseded_by == second.objective_id
    assert catalog.active_objective("business-manager", "quarterly").objective_id == second.objective_id


def test_cco_objective_requires_cco(catalog):
    with pytest.raises(HadaError) as err:
        seed_objective(catalog, owner="cco", actor="business-manager")
    assert err.value.code == "policy-denied"
    seed_objective(catalog, owner="cco", actor="cco")


def test_empty_key_results_rejected(catalog):
    with pytest.raises(HadaError) as err:
        catalog.set_objective("quarterly", "x", [], "cco", "cco")
    assert err.value.code == "malformed-objective"


def test_supersession_chain_is_acyclic(catalog):
    ids_in_order = [seed_objective(catalog, statement=f"v{i}").objective_id for i in range(5)]
    seen = set()
    cursor = ids_in_order[0]
    while cursor is not None:
        assert cursor not in seen
        seen.add(cursor)
        cursor = catalog.objectives[cursor].superseded_by
    assert seen == set(ids_in_order)


# -- KPI bindings ---------------------------------------------------------------


def test_bind_kpi_creates_ds_ticket(catalog):
    objective = seed_objective(catalog)
    binding = catalog.bind_kpi("getLoanDecision", objective.objective_id, "expected-loss", 1.0, "business-manager")
    tickets = catalog.list_tickets(kind="model-development")
    assert len(tickets) == 1
    assert tickets[0].ticket_id == "DS-10452"
    assert "expected-loss" in tickets[0].body
    assert binding.binding_id in tickets[0].links


def test_bind_kpi_policy(catalog):
    objective = seed_objective(catalog)
    with pytest.raises(HadaError) as err:
        catalog.bind_kpi("getLoanDecision", objective.objective_id, "expected-loss", 1.0, "customer")
    assert err.value.code == "policy-denied"


def test_weight_out_of_range(catalog):
    objective = seed_objective(catalog)
    with pytest.raises(HadaError) as err:
        catalog.bind_kpi("getLoanDecision", objective.objective_id, "expected-loss", 1.5, "business-manager")
    assert err.value.code == "weight-out-of-range"


def test_unknown_tool(catalog):
    objective = seed_objective(catalog)
    with pytest.raises(HadaError) as err:
        catalog.bind_kpi("mysteryTool", objective.objective_id, "expected-loss", 1.0, "business-manager")
    assert err.value.code == "unknown-tool"


def test_two_bindings_normalize_to_one(catalog):
    objective = seed_objective(catalog)
    catalog.bind_kpi("getLoanDecision", objective.objective_id, "expected-loss", 0.6, "business-manager")
    catalog.bind_kpi("getLoanDecision", objective.objective_id, "acquisition-rate", 0.4, "business-manager")
    weights = catalog.effective_weights("getLoanDecision")
    assert len(weights) == 2
    assert sum(weights.values()) == pytest.approx(1.0, abs=1e-9)


def test_superseding_objective_deactivates_bindings(catalog):
    objective = seed_objective(catalog)
    catalog.bind_kpi("getLoanDecision", objective.objective_id, "acquisition-rate", 1.0, "business-manager")
    replacement = seed_objective(catalog, statement="minimise credit risk")
    catalog.bind_kpi("getLoanDecision", replacement.objective_id, "expected-loss", 1.0, "business-manager")
    active = catalog.active_bindings("getLoanDecision")
    assert [b.kpi for b in active] == ["expected-loss"]
    assert sum(catalog.effective_weights("getLoanDecision").values()) == pytest.approx(1.0, abs=1e-9)


# -- versions ---------------------------------------------------------------


def register(catalog, version="1.1", features=("CreditHistory", "ZIP_Code", "ApplicantIncome"), metrics=None):
    return catalog.register_version(
        "getLoanDecision",
        version,
        list(features),
        TOY_TREE,
        metrics if metrics is not None else {"accuracy": 0.9, "expected_loss_proxy": 1000.0},
        "data-scientist",
    )


def test_register_with_metrics_awaits_approval(catalog):
    record = register(catalog)
    assert record.status == "awaiting-approval"
    ops = catalog.list_tickets(kind="deployment")
    assert len(ops) == 1
    assert ops[0].ticket_id == "OPS-3417"
    assert ops[0].state == "awaiting-approval"
    assert ops[0].history[0]["note"] == "Awaiting Business Approval"


def test_register_without_metrics_stays_draft(catalog):
    record = register(catalog, metrics={})
    assert record.status == "draft"
    assert catalog.list_tickets(kind="deployment")[0].state == "open"


def test_duplicate_version(catalog):
    register(catalog)
    with pytest.raises(HadaError) as err:
        register(catalog)
    assert err.value.code == "duplicate-version"


def test_missing_tree(catalog):
    with pytest.raises(HadaError) as err:
        catalog.register_version("getLoanDecision", "2.0", ["x"], {}, {}, "data-scientist")
    assert err.value.code == "missing-tree"


def test_register_requires_data_scientist(catalog):
    with pytest.raises(HadaError) as err:
        catalog.register_version("getLoanDecision", "2.0", ["x"], TOY_TREE, {}, "customer")
    assert err.value.code == "policy-denied"


def test_approve_promotes_and_deprecates_previous(catalog):
    register(catalog, version="1.0", features=("CreditHistory", "ApplicantIncome"))
    first_ticket = catalog.list_tickets(kind="deployment")[0]
    catalog.approve_deployment(first_ticket.ticket_id, "approve", "business-manager")
    assert catalog.production_version("getLoanDecision").version == "1.0"

    register(catalog, version="1.1")
    second_ticket = [t for t in catalog.list_tickets(kind="deployment") if t.state == "awaiting-approval"][0]
    catalog.approve_deployment(second_ticket.ticket_id, "approve", "business-manager")
    assert catalog.production_version("getLoanDecision").version == "1.1"
    assert catalog.get_version("getLoanDecision", "1.0").status == "deprecated"
    done = catalog.get_ticket(second_ticket.ticket_id)
    assert done.state == "done"
    assert any("Approved—Deploying" in h["note"] for h in done.history)
    assert all(h["actor"] for h in done.history)


def test_approval_policy(catalog):
    register(catalog)
    ticket = catalog.list_tickets(kind="deployment")[0]
    with pytest.raises(HadaError) as err:
        catalog.approve_deployment(ticket.ticket_id, "approve", "customer")
    assert err.value.code == "policy-denied"
    assert err.value.details["accountable"] == "business-manager"


def test_reject_deprecates(catalog):
    register(catalog)
    ticket = catalog.list_tickets(kind="deployment")[0]
    catalog.approve_deployment(ticket.ticket_id, "reject", "business-manager")
    assert catalog.get_version("getLoanDecision", "1.1").status == "deprecated"
    assert catalog.get_ticket(ticket.ticket_id).state == "rejected"


def test_watchlist_gate_blocks_approval(catalog):
    catalog.flag_attribute("ZIP_Code", "proxy for protected attributes", "value-ethics-manager")
    register(catalog)
    ticket = [t for t in catalog.list_tickets(kind="deployment") if t.state == "awaiting-approval"][0]
    with pytest.raises(HadaError) as err:
        catalog.approve_deployment(ticket.ticket_id, "approve", "business-manager")
    assert err.value.code == "watchlist-violation"
    assert err.value.details["attributes"] == ["ZIP_Code"]
    assert catalog.production_version("getLoanDecision") is None


def test_approve_wrong_ticket_state(catalog):
    register(catalog, metrics={})
    ticket = catalog.list_tickets(kind="deployment")[0]
    with pytest.raises(HadaError) as err:
        catalog.approve_deployment(ticket.ticket_id, "approve", "business-manager")
    assert err.value.code == "ticket-wrong-state"


# -- watchlist ---------------------------------------------------------------


def test_flag_attribute_creates_retrain_ticket_for_production_user(catalog):
    register(catalog, version="1.1")
    ticket = catalog.list_tickets(kind="deployment")[0]
    catalog.approve_deployment(ticket.ticket_id, "approve", "business-manager")
    before = len(catalog.list_tickets(kind="model-development"))
    catalog.flag_attribute("ZIP_Code", "socio-economic proxy", "value-ethics-manager")
    retrains = catalog.list_tickets(kind="model-development")[before:]
    assert len(retrains) == 1
    assert "ZIP_Code" in retrains[0].subject
    assert retrains[0].assigned_role == "data-scientist"


def test_duplicate_active_entry(catalog):
    catalog.flag_attribute("Gender", "protected", "value-ethics-manager")
    with pytest.raises(HadaError) as err:
        catalog.flag_attribute("Gender", "protected", "value-ethics-manager")
    assert err.value.code == "duplicate-active-entry"


def test_clear_then_reflag(catalog):
    catalog.flag_attribute("Gender", "protected", "value-ethics-manager")
    catalog.clear_attribute("Gender", "cleared for test", "value-ethics-manager")
    assert "Gender" not in catalog.active_watchlist()
    assert len(catalog.watchlist) == 2  # append-only
    catalog.flag_attribute("Gender", "re-flagged", "value-ethics-manager")
    assert "Gender" in catalog.active_watchlist()


def test_flag_requires_ethics_role(catalog):
    with pytest.raises(HadaError) as err:
        catalog.flag_attribute("Gender", "protected", "business-manager")
    assert err.value.code == "policy-denied"


# -- tickets ---------------------------------------------------------------


def test_ticket_prefix_matches_kind(catalog):
    ds = catalog.create_ticket("model-development", "s", "b", "hada", "data-scientist")
    ops = catalog.create_ticket("deployment", "s", "b", "hada", "business-manager")
    eth = catalog.create_ticket("ethics", "s", "b", "hada", "value-ethics-manager")
    assert ds.ticket_id.startswith("DS-")
    assert ops.ticket_id.startswith("OPS-")
    assert eth.ticket_id.startswith("ETH-")


def test_ticket_lifecycle_history(catalog):
    ticket = catalog.create_ticket("model-development", "s", "b", "hada", "data-scientist")
    catalog.ticket_transition(ticket.ticket_id, "in-progress", "data-scientist")
    catalog.ticket_transition(ticket.ticket_id, "done", "data-scientist")
    final = catalog.get_ticket(ticket.ticket_id)
    assert [h["state"] for h in final.history] == ["open", "in-progress", "done"]
    assert len(final.history) == 3


def test_illegal_ticket_transition(catalog):
    ticket = catalog.create_ticket("model-development", "s", "b", "hada", "data-scientist")
    catalog.ticket_transition(ticket.ticket_id, "in-progress", "data-scientist")
    catalog.ticket_transition(ticket.ticket_id, "done", "data-scientist")
    with pytest.raises(HadaError) as err:
        catalog.ticket_transition(ticket.ticket_id, "in-progress", "data-scientist")
    assert err.value.code == "illegal-ticket-transition"


def test_unknown_ticket(catalog):
    with pytest.raises(HadaError) as err:
        catalog.ticket_transition("DS-1", "done", "hada")
    assert err.value.code == "unknown-ticket"


# -- ethics triggers ---------------------------------------------------------------


@pytest.fixture
def ethics(catalog, policy, ids) -> EthicsEngine:
    return EthicsEngine(catalog, policy, ids, source_exists=lambda ref: ref.startswith("T-"))


def test_trigger_opens_eth_ticket(catalog, ethics):
    trigger = ethics.raise_trigger("customer-complaint", "ZIP_Code", "T-000001", "customer")
    assert trigger.resulting_ticket == "ETH-512"
    ticket = catalog.get_ticket("ETH-512")
    assert ticket.kind == "ethics"
    assert ticket.assigned_role == "value-ethics-manager"


def test_trigger_unknown_source(ethics):
    with pytest.raises(HadaError) as err:
        ethics.raise_trigger("customer-complaint", None, "nowhere", "customer")
    assert err.value.code == "unknown-source"


def test_resolve_flag_and_retrain(catalog, ethics):
    register(catalog, version="1.1")
    ticket = catalog.list_tickets(kind="deployment")[0]
    catalog.approve_deployment(ticket.ticket_id, "approve", "business-manager")
    trigger = ethics.raise_trigger("customer-complaint", "ZIP_Code", "T-000001", "customer")
    resolved = ethics.resolve_trigger(
        trigger.trigger_id, {"flag_attribute": "ZIP_Code", "retrain": True}, "value-ethics-manager"
    )
    assert resolved.state == "resolved"
    assert "ZIP_Code" in catalog.active_watchlist()
    retrains = [t for t in catalog.list_tickets(kind="model-development") if "ZIP_Code" in t.subject]
    assert len(retrains) == 1
    assert catalog.get_ticket(trigger.resulting_ticket).state == "done"


def test_resolve_requires_ethics_role(catalog, ethics):
    trigger = ethics.raise_trigger("manual", None, "T-000009", "audit-manager")
    with pytest.raises(HadaError) as err:
        ethics.resolve_trigger(trigger.trigger_id, {"dismiss": True}, "business-manager")
    assert err.value.code == "policy-denied"


def test_dismiss_only_changes_nothing(catalog, ethics):
    trigger = ethics.raise_trigger("manual", None, "T-000009", "audit-manager")
    watch_before = catalog.active_watchlist()
    tickets_before = len(catalog.list_tickets(kind="model-development"))
    resolved = ethics.resolve_trigger(trigger.trigger_id, {"dismiss": True}, "value-ethics-manager")
    assert resolved.state == "resolved"
    assert catalog.active_watchlist() == watch_before
    assert len(catalog.list_tickets(kind="model-development")) == tickets_before


def test_every_trigger_links_to_exactly_one_eth_ticket(catalog, ethics):
    for i in range(3):
        ethics.raise_trigger("manual", None, f"T-00000{i}", "audit-manager")
    tickets = {t.resulting_ticket for t in catalog.list_triggers()}
    assert len(tickets) == len(catalog.list_triggers()) == 3
    for ref in tickets:
        assert catalog.get_ticket(ref).kind == "ethics"


# -- replay / persistence ---------------------------------------------------------------


def test_replay_reconstructs_state(clock, ids, policy, tmp_path):
    ledger = Ledger(tmp_path / "ledger.jsonl", clock=clock)
    catalog = Catalog(ledger, ids, clock, policy, tool_exists=lambda t: True)
    objective = seed_objective(catalog)
    catalog.bind_kpi("getLoanDecision", objective.objective_id, "expected-loss", 1.0, "business-manager")
    register(catalog, version="1.1")
    ticket = [t for t in catalog.list_tickets(kind="deployment")][0]
    catalog.approve_deployment(ticket.ticket_id, "approve", "business-manager")
    catalog.flag_attribute("ZIP_Code", "proxy", "value-ethics-manager")
    snapshot = catalog.snapshot()

    from hada.clock import Clock
    from hada.identifiers import IdFactory

    ledger2 = Ledger(tmp_path / "ledger.jsonl", clock=Clock("simulated"))
    catalog2 = Catalog(ledger2, IdFactory(), Clock("simulated"), policy, tool_exists=lambda t: True)
    assert catalog2.snapshot() == snapshot


def test_replayed_counters_continue(clock, ids, policy, tmp_path):
    ledger = Ledger(tmp_path / "ledger.jsonl", clock=clock)
    catalog = Catalog(ledger, ids, clock, policy, tool_exists=lambda t: True)
    catalog.create_ticket("model-development", "s", "b", "hada", "data-scientist")

    from hada.clock import Clock
    from hada.identifiers import IdFactory

    catalog2 = Catalog(Ledger(tmp_path / "ledger.jsonl", clock=Clock("simulated")), IdFactory(), Clock("simulated"), policy)
    fresh = catalog2.create_ticket("model-development", "s2", "b2", "hada", "data-scientist")
    assert fresh.ticket_id == "DS-10453"


# -- invariants under random interleavings ------------------------------------------


def test_one_production_version_invariant_random_ops(clock, ids, policy):
    # After any interleaving of register/approve/reject/flag/clear ops there
    # is at most one production version, and no version ever *enters*
    # production while a flagged attribute sits in its feature list.
    # (Flagging an attribute a production model already uses keeps it live
    # and opens a retrain ticket instead, so entry is the gated transition.)
    ledger = Ledger(clock=clock)
    catalog = Catalog(ledger, ids, clock, policy, tool_exists=lambda t: True)
    rng = random.Random(42)
    version_counter = 0
    attributes = ["ZIP_Code", "PropertyArea", "Dependents"]
    promotions = 0
    for _ in range(400):
        op = rng.random()
        try:
            if op < 0.4:
                version_counter += 1
                features = rng.sample(["CreditHistory", "ApplicantIncome", "ZIP_Code", "PropertyArea"], k=rng.randint(1, 3))
                register(catalog, version=f"9.{version_counter}", features=features)
            elif op < 0.75:
                waiting = [t for t in catalog.list_tickets(state="awaiting-approval", kind="deployment")]
                if waiting:
                    ticket = rng.choice(waiting)
                    decision = "approve" if rng.random() < 0.7 else "reject"
                    catalog.approve_deployment(ticket.ticket_id, decision, "business-manager")
                    if decision == "approve":
                        promotions += 1
                        promoted = catalog.get_version(*ticket.links[0].split("@"))
                        assert not set(promoted.feature_list) & catalog.active_watchlist()
            elif op < 0.9:
                catalog.flag_attribute(rng.choice(attributes), "test", "value-ethics-manager")
            else:
                catalog.clear_attribute(rng.choice(attributes), "test", "value-ethics-manager")
        except HadaError:
            pass
        assert len(catalog.list_versions(status="production")) <= 1
    assert promotions > 10  # the walk actually exercised the gate
