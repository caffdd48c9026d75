"""Decision-tree induction and scoring, from scratch.

Greedy top-down splitting on weighted Gini impurity. Numeric candidates are
midpoints between consecutive distinct sorted values; categorical candidates
are one-vs-rest on each category (sorted). Ties break toward the earlier
feature in training order, then the lower threshold, implemented simply by
enumerating candidates in exactly that order and only accepting strict
improvements. Split selection compares impurities as exact fractions, so
tie-breaking never depends on float rounding.

Trees serialize to a versioned JSON form so any version ever deployed can be
diffed, audited, and replayed.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from ..errors import HadaError

FORMAT = "hada.tree/1"

# One-vs-rest on a very wide categorical (e.g. raw ZIP codes) would enumerate
# hundreds of near-useless candidates; beyond this many distinct values the
# feature is grouped by its first three characters.
MAX_CATEGORIES = 32
PREFIX_TRANSFORM = "prefix3"

OUTCOMES = ("approved", "rejected")


@dataclass
class TrainingConfig:
    objective_label: str = "Loan_Status"
    criterion: str = "gini"
    max_depth: int = 4
    min_samples_leaf: int = 1
    excluded_features: list[str] = field(default_factory=list)
    random_seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "objective_label": self.objective_label,
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "excluded_features": list(self.excluded_features),
            "random_seed": self.random_seed,
        }


@dataclass
class DecisionTree:
    root: int
    nodes: dict[int, dict[str, Any]]
    feature_list: list[str]
    feature_kinds: dict[str, str]
    training_config: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": FORMAT,
            "root": self.root,
            "nodes": [self.nodes[k] for k in sorted(self.nodes)],
            "feature_list": list(self.feature_list),
            "feature_kinds": dict(self.feature_kinds),
            "training_config": self.training_config,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "DecisionTree":
        if raw.get("format") != FORMAT:
            raise HadaError(
                "unsupported-format-version", f"cannot read tree format {raw.get('format')!r}"
            )
        try:
            nodes = {n["node_id"]: n for n in raw["nodes"]}
            return cls(
                root=raw["root"],
                nodes=nodes,
                feature_list=list(raw["feature_list"]),
                feature_kinds=dict(raw["feature_kinds"]),
                training_config=raw.get("training_config"),
            )
        except (KeyError, TypeError) as exc:
            raise HadaError("corrupt-payload", f"malformed tree payload: {exc}") from exc


def gini_impurity(labels: list[str]) -> Fraction:
    """1 - sum(p_i^2), computed exactly over the class counts."""
    n = len(labels)
    if n == 0:
        return Fraction(0)
    counts = Counter(labels)
    return 1 - sum(Fraction(c, n) ** 2 for c in counts.values())


def _majority(labels: list[str]) -> str:
    counts = Counter(labels)
    # Equal counts fall to the conservative outcome.
    return "approved" if counts.get("approved", 0) > counts.get("rejected", 0) else "rejected"


def _feature_views(rows, feature, kind):
    """Candidate (comparator, value, transform, partition fn) tuples."""
    values = [row[feature] for row in rows]
    if kind == "numeric":
        distinct = sorted(set(values))
        for low, high in zip(distinct, distinct[1:]):
            threshold = (low + high) / 2
            yield "<=", threshold, None, lambda v, t=threshold: v <= t
    else:
        transform = None
        rendered = [str(v) for v in values]
        if len(set(rendered)) > MAX_CATEGORIES:
            transform = PREFIX_TRANSFORM
            rendered = [v[:3] for v in rendered]
        for category in sorted(set(rendered)):
            if transform == PREFIX_TRANSFORM:
                yield "=", category, transform, lambda v, c=category: str(v)[:3] == c
            else:
                yield "=", category, transform, lambda v, c=category: str(v) == c


def _best_split(rows, labels, feature_list, kinds, min_samples_leaf):
    parent = gini_impurity(labels)
    n = len(labels)
    best = None
    best_score = parent
    for feature in feature_list:
        for comparator, value, transform, test in _feature_views(rows, feature, kinds[feature]):
            left = [i for i, row in enumerate(rows) if test(row[feature])]
            if len(left) < min_samples_leaf or n - len(left) < min_samples_leaf or not 0 < len(left) < n:
                continue
            right = [i for i in range(n) if i not in set(left)]
            score_value = Fraction(len(left), n) * gini_impurity([labels[i] for i in left]) + Fraction(
                len(right), n
            ) * gini_impurity([labels[i] for i in right])
            if score_value < best_score:
                best = (feature, comparator, value, transform, left, right)
                best_score = score_value
    return best


def train(dataset: Any, config: TrainingConfig) -> DecisionTree:
    excluded = set(config.excluded_features)
    feature_list = [f for f in dataset.feature_list if f not in excluded]
    rows = dataset.rows
    labels = list(dataset.labels)
    if not rows:
        raise HadaError("empty-dataset", "no training rows after exclusions")
    bad = sorted(set(labels) - set(OUTCOMES))
    if bad:
        raise HadaError("non-binary-label", f"labels outside {OUTCOMES}: {bad}")

    nodes: dict[int, dict[str, Any]] = {}
    counter = {"next": 0}

    def new_node() -> int:
        node_id = counter["next"]
        counter["next"] += 1
        return node_id

    def build(row_idx: list[int], depth: int) -> int:
        node_id = new_node()
        sub_labels = [labels[i] for i in row_idx]
        counts = Counter(sub_labels)
        leaf = {
            "node_id": node_id,
            "kind": "leaf",
            "outcome": _majority(sub_labels),
            "counts": {"approved": counts.get("approved", 0), "rejected": counts.get("rejected", 0)},
            "impurity": float(gini_impurity(sub_labels)),
        }
        if depth >= config.max_depth or len(set(sub_labels)) <= 1:
            nodes[node_id] = leaf
            return node_id
        found = _best_split(
            [rows[i] for i in row_idx], sub_labels, feature_list, dataset.feature_kinds, config.min_samples_leaf
        )
        if found is None:
            nodes[node_id] = leaf
            return node_id
        feature, comparator, value, transform, left_local, right_local = found
        node: dict[str, Any] = {
            "node_id": node_id,
            "kind": "split",
            "feature": feature,
            "comparator": comparator,
            "value": value,
            "counts": leaf["counts"],
            "impurity": leaf["impurity"],
        }
        if transform:
            node["transform"] = transform
        nodes[node_id] = node
        node["left"] = build([row_idx[i] for i in left_local], depth + 1)
        node["right"] = build([row_idx[i] for i in right_local], depth + 1)
        return node_id

    root = build(list(range(len(rows))), 0)
    tree = DecisionTree(
        root=root,
        nodes=nodes,
        feature_list=feature_list,
        feature_kinds={f: dataset.feature_kinds[f] for f in feature_list},
        training_config=config.to_dict(),
    )
    validate_tree(tree)
    return tree


def validate_tree(tree: DecisionTree) -> None:
    if tree.root not in tree.nodes:
        raise HadaError("corrupt-payload", "root node missing")
    seen: set[int] = set()
    stack = [tree.root]
    while stack:
        node_id = stack.pop()
        if node_id in seen:
            raise HadaError("corrupt-payload", f"node {node_id} reachable twice (cycle or shared child)")
        seen.add(node_id)
        node = tree.nodes.get(node_id)
        if node is None:
            raise HadaError("corrupt-payload", f"dangling child reference {node_id}")
        if node["kind"] == "split":
            if node["feature"] not in tree.feature_list:
                raise HadaError("corrupt-payload", f"split on undeclared feature '{node['feature']}'")
            stack.extend([node["left"], node["right"]])
        elif node["kind"] == "leaf":
            if node["outcome"] not in OUTCOMES:
                raise HadaError("corrupt-payload", f"leaf outcome {node['outcome']!r} invalid")
        else:
            raise HadaError("corrupt-payload", f"unknown node kind {node['kind']!r}")
    unreachable = set(tree.nodes) - seen
    if unreachable:
        raise HadaError("corrupt-payload", f"unreachable nodes: {sorted(unreachable)}")


def _typed_value(tree: DecisionTree, feature: str, application: dict[str, Any]) -> Any:
    if feature not in application or application[feature] in (None, ""):
        raise HadaError("missing-feature", f"application lacks '{feature}'", ref=feature)
    value = application[feature]
    kind = tree.feature_kinds.get(feature, "categorical")
    if kind == "numeric":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            try:
                value = float(str(value).replace("$", "").replace(",", ""))
            except ValueError:
                raise HadaError("type-mismatch", f"'{feature}' must be numeric", ref=feature)
        return float(value)
    return str(value)


def score(tree: DecisionTree, application: dict[str, Any]) -> tuple[str, list[dict[str, Any]]]:
    """Deterministic root-to-leaf traversal; returns (outcome, path)."""
    for feature in tree.feature_list:
        _typed_value(tree, feature, application)  # validate up front
    node = tree.nodes[tree.root]
    path: list[dict[str, Any]] = []
    while node["kind"] == "split":
        feature = node["feature"]
        value = _typed_value(tree, feature, application)
        if node["comparator"] == "<=":
            took_left = value <= node["value"]
        elif node.get("transform") == PREFIX_TRANSFORM:
            took_left = str(value)[:3] == node["value"]
        else:
            took_left = str(value) == node["value"]
        path.append(
            {
                "feature": feature,
                "comparator": node["comparator"],
                "threshold": node["value"],
                "branch": "left" if took_left else "right",
            }
        )
        node = tree.nodes[node["left"] if took_left else node["right"]]
    return node["outcome"], path


def replay_path(tree: DecisionTree, path: list[dict[str, Any]], feature_vector: dict[str, Any]) -> str:
    """Re-walk a recorded path against the stored tree; returns the leaf outcome.

    Raises if the recorded steps diverge from the tree structure.
    """
    node = tree.nodes[tree.root]
    for step in path:
        if node["kind"] != "split" or node["feature"] != step["feature"] or node["value"] != step["threshold"]:
            raise HadaError("corrupt-payload", "recorded path diverges from tree structure")
        node = tree.nodes[node["left"] if step["branch"] == "left" else node["right"]]
    if node["kind"] != "leaf":
        raise HadaError("corrupt-payload", "recorded path stops before a leaf")
    return node["outcome"]


def serialize_tree(tree: DecisionTree) -> bytes:
    validate_tree(tree)
    return json.dumps(tree.to_dict(), sort_keys=True).encode("utf-8")


def deserialize_tree(blob: bytes) -> DecisionTree:
    try:
        raw = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise HadaError("corrupt-payload", f"unreadable tree payload: {exc}") from exc
    if not isinstance(raw, dict):
        raise HadaError("corrupt-payload", "tree payload must be an object")
    tree = DecisionTree.from_dict(raw)
    validate_tree(tree)
    return tree
