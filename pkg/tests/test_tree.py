from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hada.errors import HadaError
from hada.loan.tree import (
    DecisionTree,
    TrainingConfig,
    deserialize_tree,
    gini_impurity,
    score,
    serialize_tree,
    train,
    validate_tree,
)
from hada.loan.schema import Dataset

from oracles import oracle_gini, oracle_score, oracle_train


def make_dataset(rows, labels, kinds=None):
    feature_list = list(rows[0].keys()) if rows else []
    kinds = kinds or {f: ("numeric" if isinstance(rows[0][f], (int, float)) else "categorical") for f in feature_list}
    return Dataset(rows=rows, labels=labels, feature_list=feature_list, feature_kinds=kinds)


TOY_ROWS = [
    {"ApplicantIncome": 10, "CreditHistory": "No"},
    {"ApplicantIncome": 50, "CreditHistory": "Yes"},
    {"ApplicantIncome": 60, "CreditHistory": "Yes"},
    {"ApplicantIncome": 5, "CreditHistory": "No"},
]
TOY_LABELS = ["rejected", "approved", "approved", "rejected"]


def to_nested(tree: DecisionTree, node_id=None):
    node = tree.nodes[tree.root if node_id is None else node_id]
    if node["kind"] == "leaf":
        return {"kind": "leaf", "outcome": node["outcome"]}
    return {
        "kind": "split",
        "feature": node["feature"],
        "comparator": node["comparator"],
        "value": node["value"],
        "left": to_nested(tree, node["left"]),
        "right": to_nested(tree, node["right"]),
    }


# -- gini ---------------------------------------------------------------


def test_gini_matches_independent_formula():
    cases = [
        ["approved"] * 4,
        ["approved", "rejected"],
        ["approved", "approved", "rejected"],
        ["rejected"] * 7 + ["approved"] * 3,
    ]
    for labels in cases:
        assert gini_impurity(labels) == oracle_gini(labels)


def test_gini_known_values():
    assert gini_impurity(["approved", "rejected"]) == Fraction(1, 2)
    assert gini_impurity(["approved"] * 3) == 0
    assert float(gini_impurity(["approved", "approved", "rejected"])) == pytest.approx(4 / 9)


# -- training ---------------------------------------------------------------


def test_toy_dataset_root_split_matches_oracle():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    tree = train(dataset, TrainingConfig(max_depth=2))
    expected = oracle_train(TOY_ROWS, TOY_LABELS, dataset.feature_list, dataset.feature_kinds, 2)
    assert to_nested(tree) == expected
    root = tree.nodes[tree.root]
    assert root["feature"] == "ApplicantIncome"
    assert root["value"] == 30.0


def test_single_class_dataset_yields_single_leaf():
    dataset = make_dataset(TOY_ROWS, ["approved"] * 4)
    tree = train(dataset, TrainingConfig(max_depth=3))
    assert len(tree.nodes) == 1
    assert tree.nodes[tree.root]["outcome"] == "approved"


def test_leaf_tie_defaults_to_rejected():
    rows = [{"x": 1.0}, {"x": 1.0}]
    dataset = make_dataset(rows, ["approved", "rejected"])
    tree = train(dataset, TrainingConfig(max_depth=2))
    assert tree.nodes[tree.root]["kind"] == "leaf"
    assert tree.nodes[tree.root]["outcome"] == "rejected"


def test_excluded_features_never_appear():
    rows = [
        {"ApplicantIncome": 10, "ZIP_Code": "99901"},
        {"ApplicantIncome": 50, "ZIP_Code": "75201"},
        {"ApplicantIncome": 60, "ZIP_Code": "75201"},
        {"ApplicantIncome": 5, "ZIP_Code": "99901"},
    ]
    dataset = make_dataset(rows, TOY_LABELS, kinds={"ApplicantIncome": "numeric", "ZIP_Code": "categorical"})
    tree = train(dataset, TrainingConfig(max_depth=3, excluded_features=["ZIP_Code"]))
    assert "ZIP_Code" not in tree.feature_list
    for node in tree.nodes.values():
        assert node.get("feature") != "ZIP_Code"


def test_empty_dataset_rejected():
    dataset = make_dataset([], [])
    with pytest.raises(HadaError) as err:
        train(dataset, TrainingConfig(max_depth=2))
    assert err.value.code == "empty-dataset"


def test_non_binary_labels_rejected():
    dataset = make_dataset(TOY_ROWS, ["rejected", "approved", "maybe", "rejected"])
    with pytest.raises(HadaError) as err:
        train(dataset, TrainingConfig(max_depth=2))
    assert err.value.code == "non-binary-label"


def test_min_samples_leaf_respected():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    tree = train(dataset, TrainingConfig(max_depth=4, min_samples_leaf=3))
    # No admissible split leaves >= 3 rows on each side of 4 rows.
    assert tree.nodes[tree.root]["kind"] == "leaf"


def random_dataset(rng: random.Random):
    n_rows = rng.randint(2, 12)
    n_features = rng.randint(1, 3)
    feature_list = [f"f{i}" for i in range(n_features)]
    kinds = {}
    rows = []
    for f in feature_list:
        kinds[f] = rng.choice(["numeric", "categorical"])
    for _ in range(n_rows):
        row = {}
        for f in feature_list:
            if kinds[f] == "numeric":
                row[f] = float(rng.randint(0, 6))
            else:
                row[f] = rng.choice(["a", "b", "c"])
        rows.append(row)
    labels = [rng.choice(["approved", "rejected"]) for _ in range(n_rows)]
    return Dataset(rows=rows, labels=labels, feature_list=feature_list, feature_kinds=kinds)


def test_trainer_matches_oracle_on_random_datasets():
    rng = random.Random(2024)
    for _ in range(80):
        dataset = random_dataset(rng)
        depth = rng.randint(1, 2)
        min_leaf = rng.randint(1, 2)
        tree = train(dataset, TrainingConfig(max_depth=depth, min_samples_leaf=min_leaf))
        expected = oracle_train(
            dataset.rows, dataset.labels, dataset.feature_list, dataset.feature_kinds, depth, min_leaf
        )
        assert to_nested(tree) == expected


# -- scoring ---------------------------------------------------------------


def test_score_path_and_determinism():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    tree = train(dataset, TrainingConfig(max_depth=2))
    outcome, path = score(tree, {"ApplicantIncome": 50, "CreditHistory": "Yes"})
    assert outcome == "approved"
    assert path == [
        {"feature": "ApplicantIncome", "comparator": "<=", "threshold": 30.0, "branch": "right"}
    ]
    for _ in range(100):
        assert score(tree, {"ApplicantIncome": 50, "CreditHistory": "Yes"}) == (outcome, path)


def test_score_agrees_with_oracle_on_random_applications():
    rng = random.Random(99)
    for _ in range(40):
        dataset = random_dataset(rng)
        tree = train(dataset, TrainingConfig(max_depth=2))
        nested = to_nested(tree)
        for _ in range(5):
            app = {}
            for f in dataset.feature_list:
                if dataset.feature_kinds[f] == "numeric":
                    app[f] = float(rng.randint(0, 6))
                else:
                    app[f] = rng.choice(["a", "b", "c"])
            outcome, _ = score(tree, app)
            assert outcome == oracle_score(nested, app)


def test_path_replay_reaches_same_leaf():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    tree = train(dataset, TrainingConfig(max_depth=2))
    app = {"ApplicantIncome": 7, "CreditHistory": "No"}
    outcome, path = score(tree, app)
    # Replay the recorded comparisons by hand.
    node = tree.nodes[tree.root]
    for step in path:
        assert node["feature"] == step["feature"]
        value = app[step["feature"]]
        if step["comparator"] == "<=":
            took_left = value <= step["threshold"]
        else:
            took_left = value == step["threshold"]
        assert step["branch"] == ("left" if took_left else "right")
        node = tree.nodes[node["left"] if took_left else node["right"]]
    assert node["kind"] == "leaf"
    assert node["outcome"] == outcome


def test_missing_feature_error():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    tree = train(dataset, TrainingConfig(max_depth=2))
    with pytest.raises(HadaError) as err:
        score(tree, {"CreditHistory": "Yes"})
    assert err.value.code == "missing-feature"
    assert err.value.details["ref"] == "ApplicantIncome"


def test_type_mismatch_error():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    tree = train(dataset, TrainingConfig(max_depth=2))
    with pytest.raises(HadaError) as err:
        score(tree, {"ApplicantIncome": "abc", "CreditHistory": "Yes"})
    assert err.value.code == "type-mismatch"
    assert err.value.details["ref"] == "ApplicantIncome"


def test_single_leaf_tree_scores_with_empty_path():
    tree = DecisionTree(
        root=0,
        nodes={0: {"node_id": 0, "kind": "leaf", "outcome": "approved", "counts": {"approved": 1, "rejected": 0}}},
        feature_list=[],
        feature_kinds={},
    )
    assert score(tree, {"anything": 1}) == ("approved", [])


def test_zip_prefix_grouping_used_for_wide_categoricals():
    rng = random.Random(5)
    rows = []
    labels = []
    for i in range(80):
        risky = i % 2 == 0
        zipcode = f"999{rng.randint(10, 99)}" if risky else f"750{rng.randint(10, 99)}"
        rows.append({"ZIP_Code": zipcode})
        labels.append("rejected" if risky else "approved")
    dataset = Dataset(rows=rows, labels=labels, feature_list=["ZIP_Code"], feature_kinds={"ZIP_Code": "categorical"})
    tree = train(dataset, TrainingConfig(max_depth=1))
    root = tree.nodes[tree.root]
    assert root["kind"] == "split"
    assert root.get("transform") == "prefix3"
    assert root["value"] in {"750", "999"}
    outcome, path = score(tree, {"ZIP_Code": "99923"})
    assert outcome == "rejected"


# -- serialization ---------------------------------------------------------------


def test_round_trip_structural_equality():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    tree = train(dataset, TrainingConfig(max_depth=2))
    blob = serialize_tree(tree)
    back = deserialize_tree(blob)
    assert back.to_dict() == tree.to_dict()


def test_truncated_payload():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    blob = serialize_tree(train(dataset, TrainingConfig(max_depth=2)))
    with pytest.raises(HadaError) as err:
        deserialize_tree(blob[: len(blob) // 2])
    assert err.value.code == "corrupt-payload"


def test_unsupported_format_version():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    raw = json.loads(serialize_tree(train(dataset, TrainingConfig(max_depth=2))))
    raw["format"] = "hada.tree/99"
    with pytest.raises(HadaError) as err:
        deserialize_tree(json.dumps(raw).encode())
    assert err.value.code == "unsupported-format-version"


def test_validate_tree_rejects_broken_structures():
    dataset = make_dataset(TOY_ROWS, TOY_LABELS)
    tree = train(dataset, TrainingConfig(max_depth=2))
    broken = tree.to_dict()
    broken["nodes"][0]["left"] = 99  # dangling child
    with pytest.raises(HadaError) as err:
        validate_tree(DecisionTree.from_dict(broken))
    assert err.value.code == "corrupt-payload"


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_property_trainer_oracle_equivalence(seed):
    rng = random.Random(seed)
    dataset = random_dataset(rng)
    depth = rng.randint(1, 2)
    tree = train(dataset, TrainingConfig(max_depth=depth))
    expected = oracle_train(dataset.rows, dataset.labels, dataset.feature_list, dataset.feature_kinds, depth)
    assert to_nested(tree) == expected
    validate_tree(tree)
