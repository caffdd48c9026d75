from __future__ import annotations

import pytest

from hada.catalog import Catalog
from hada.errors import HadaError
from hada.ledger import Ledger
from hada.loan.engine import LoanEngine, load_fixture_tree, tool_manifest
from hada.loan.tree import score as tree_score
from hada.policy import PolicyService, RaciMatrix, bundled_matrix_path
from hada.toolbus import ToolBus, ToolManifest, validate_arguments

APPLICATION = {
    "CreditHistory": "Yes",
    "ZIP_Code": "75201",
    "ApplicantIncome": 4100,
}


@pytest.fixture
def policy():
    return PolicyService(RaciMatrix.load(bundled_matrix_path()))


@pytest.fixture
def env(clock, ids, policy):
    ledger = Ledger(clock=clock)
    catalog = Catalog(ledger, ids, clock, policy, tool_exists=lambda t: True)
    engine = LoanEngine(catalog, ledger, policy, ids, clock)
    flags = []
    bus = ToolBus(
        policy,
        ledger,
        ids,
        clock,
        watchlist=catalog.active_watchlist,
        ethics_hook=lambda attr, inv, caller: flags.append((attr, inv, caller)),
    )
    manifest = ToolManifest.from_dict(tool_manifest())
    bus.register_tool(manifest)
    bus.bind_local(
        "local:loan-engine/decision",
        lambda args, ctx: engine.serve_decision("production", args, ctx.caller, ctx.task_id),
    )
    tree = load_fixture_tree("1.1")
    catalog.register_version(
        "getLoanDecision", "1.1", tree.feature_list, tree.to_dict(),
        {"accuracy": 0.9, "expected_loss_proxy": 10.0}, "data-scientist",
    )
    ticket = catalog.list_tickets(kind="deployment")[0]
    catalog.approve_deployment(ticket.ticket_id, "approve", "business-manager")
    return bus, catalog, ledger, flags


def test_register_and_discover(env):
    bus, *_ = env
    manifest = bus.get_manifest("getLoanDecision")
    assert manifest.endpoint == "local:loan-engine/decision"
    assert manifest.raci_mirror["hada"] == "R"
    assert [m.tool_id for m in bus.list_tools()] == ["getLoanDecision"]


def test_register_duplicate(env):
    bus, *_ = env
    with pytest.raises(HadaError) as err:
        bus.register_tool(ToolManifest.from_dict(tool_manifest()))
    assert err.value.code == "duplicate-tool-id"


def test_sensitive_inputs_outside_schema_rejected(clock, ids, policy):
    bus = ToolBus(policy, Ledger(clock=clock), ids, clock)
    raw = tool_manifest()
    raw["tool_id"] = "other"
    raw["sensitive_inputs"] = ["NotAField"]
    with pytest.raises(HadaError) as err:
        bus.register_tool(ToolManifest.from_dict(raw))
    assert err.value.code == "malformed-schema"


def test_malformed_schema_types_rejected(clock, ids, policy):
    bus = ToolBus(policy, Ledger(clock=clock), ids, clock)
    with pytest.raises(HadaError) as err:
        bus.register_tool(
            ToolManifest(
                tool_id="x", name="x", description="", endpoint="local:x",
                activity="optimize-ai-tools",
                input_schema={"a": {"type": "array"}}, output_schema={},
            )
        )
    assert err.value.code == "malformed-schema"


def test_list_registration_order_and_filter(clock, ids, policy):
    bus = ToolBus(policy, Ledger(clock=clock), ids, clock)
    assert bus.list_tools() == []
    for name in ("alpha", "loanHelper", "gamma"):
        bus.register_tool(
            ToolManifest(
                tool_id=name, name=name, description=f"{name} tool", endpoint=f"local:{name}",
                activity="optimize-ai-tools", input_schema={}, output_schema={},
            )
        )
    assert [m.tool_id for m in bus.list_tools()] == ["alpha", "loanHelper", "gamma"]
    assert [m.tool_id for m in bus.list_tools("loan")] == ["loanHelper"]


def test_invoke_returns_decision(env):
    bus, _, ledger, _ = env
    invocation = bus.invoke("getLoanDecision", APPLICATION, "customer", "T-000001")
    assert invocation.result["outcome"] == "approved"
    assert invocation.result["model_version"] == "1.1"
    assert invocation.error is None
    # Linked to exactly the originating task and present on the ledger.
    entries = [e for e in ledger.iter_kind("invocation")]
    assert len(entries) == 1
    assert entries[0].payload["task_id"] == "T-000001"


def test_invoke_type_violation_names_field(env):
    bus, *_ = env
    bad = dict(APPLICATION, ApplicantIncome="abc")
    with pytest.raises(HadaError) as err:
        bus.invoke("getLoanDecision", bad, "customer", "T-000001")
    assert err.value.code == "schema-violation"
    assert err.value.details["field"] == "ApplicantIncome"


def test_invoke_undeclared_argument_rejected(env):
    bus, *_ = env
    with pytest.raises(HadaError) as err:
        bus.invoke("getLoanDecision", dict(APPLICATION, Sneaky=1), "customer", "T-1")
    assert err.value.details["field"] == "Sneaky"


def test_invoke_unknown_tool(env):
    bus, *_ = env
    with pytest.raises(HadaError) as err:
        bus.invoke("nothing", {}, "customer", "T-1")
    assert err.value.code == "unknown-tool"


def test_invoke_policy_involvement(env):
    bus, *_ = env
    # data-scientist has no involvement in individual-loan-decision.
    with pytest.raises(HadaError) as err:
        bus.invoke("getLoanDecision", APPLICATION, "data-scientist", "T-1")
    assert err.value.code == "policy-denied"
    # consulted customer and responsible hada both may invoke.
    assert bus.invoke("getLoanDecision", APPLICATION, "customer", "T-1").result
    assert bus.invoke("getLoanDecision", APPLICATION, "hada", "T-1").result


def test_unbound_local_endpoint_is_downstream_unavailable(clock, ids, policy):
    bus = ToolBus(policy, Ledger(clock=clock), ids, clock)
    bus.register_tool(
        ToolManifest(
            tool_id="ghost", name="ghost", description="", endpoint="local:ghost",
            activity="individual-loan-decision", input_schema={}, output_schema={},
        )
    )
    with pytest.raises(HadaError) as err:
        bus.invoke("ghost", {}, "hada", "T-1")
    assert err.value.code == "downstream-unavailable"


def test_watchlist_hit_flags_invocation_and_fires_hook(env):
    bus, catalog, ledger, flags = env
    catalog.flag_attribute("ZIP_Code", "sensitive", "value-ethics-manager")
    invocation = bus.invoke("getLoanDecision", APPLICATION, "customer", "T-000002")
    assert invocation.ethics_flags == ["ZIP_Code"]
    assert flags == [("ZIP_Code", invocation.invocation_id, "customer")]
    entry = [e for e in ledger.iter_kind("invocation")][-1]
    assert entry.payload["ethics_flags"] == ["ZIP_Code"]


def test_watchlist_check_uses_live_list(env):
    bus, catalog, _, flags = env
    bus.invoke("getLoanDecision", APPLICATION, "customer", "T-1")
    assert flags == []  # nothing flagged yet
    catalog.flag_attribute("ZIP_Code", "sensitive", "value-ethics-manager")
    bus.invoke("getLoanDecision", APPLICATION, "customer", "T-2")
    assert len(flags) == 1  # same manifest, new watchlist state


def test_hot_swap_stub_and_engine_agree(env, clock, ids, policy):
    # Same manifest, two different servers: the real engine and an
    # independent stub that traverses the serialized tree itself.
    bus, catalog, _, _ = env

    def stub(args, ctx):
        from hada.loan.tree import DecisionTree

        version = catalog.production_version("getLoanDecision")
        tree = DecisionTree.from_dict(version.tree)
        outcome, path = tree_score(tree, args)
        return {"outcome": outcome, "decision_path": path, "model_version": version.version}

    real = bus.invoke("getLoanDecision", APPLICATION, "customer", "T-1").result
    bus.bind_local("local:loan-engine/decision", stub)
    swapped = bus.invoke("getLoanDecision", APPLICATION, "customer", "T-1").result
    assert swapped["outcome"] == real["outcome"]
    assert swapped["decision_path"] == real["decision_path"]
    assert swapped["model_version"] == real["model_version"]


def test_validation_is_order_independent(env):
    bus, *_ = env
    manifest = bus.get_manifest("getLoanDecision")
    forward = dict(APPLICATION)
    backward = dict(reversed(list(APPLICATION.items())))
    assert validate_arguments(manifest, forward) is None
    assert validate_arguments(manifest, backward) is None


def test_required_argument_enforced(clock, ids, policy):
    bus = ToolBus(policy, Ledger(clock=clock), ids, clock)
    bus.register_tool(
        ToolManifest(
            tool_id="t", name="t", description="", endpoint="local:t",
            activity="optimize-ai-tools",
            input_schema={"version": {"type": "string", "required": True}},
            output_schema={},
        )
    )
    bus.bind_local("local:t", lambda args, ctx: {})
    with pytest.raises(HadaError) as err:
        bus.invoke("t", {}, "data-scientist", "T-1")
    assert err.value.code == "schema-violation"
    assert err.value.details["field"] == "version"
