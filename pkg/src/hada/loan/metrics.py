"""Offline validation metrics for candidate trees."""

from __future__ import annotations

from typing import Any

from ..errors import HadaError
from .tree import DecisionTree, score


def compute_validation_metrics(tree: DecisionTree, holdout: Any) -> dict[str, float]:
    """Accuracy, error rates, and an expected-credit-loss proxy.

    The loss proxy is the count of false approvals (approved but labelled a
    default) times their mean requested LoanAmount, i.e. the amount put at
    risk by approvals the label says should have been declined.
    """
    if not holdout.rows:
        raise HadaError("empty-holdout", "holdout dataset is empty")
    n = len(holdout.rows)
    correct = 0
    false_approvals: list[dict[str, Any]] = []
    false_rejections = 0
    approvals = 0
    for row, label in zip(holdout.rows, holdout.labels):
        outcome, _ = score(tree, row)
        if outcome == "approved":
            approvals += 1
        if outcome == label:
            correct += 1
        elif outcome == "approved":
            false_approvals.append(row)
        else:
            false_rejections += 1
    fa = len(false_approvals)
    mean_amount = (
        sum(float(r.get("LoanAmount", 0.0)) for r in false_approvals) / fa if fa else 0.0
    )
    return {
        "n": float(n),
        "accuracy": correct / n,
        "approval_rate": approvals / n,
        "false_approval_rate": fa / n,
        "false_rejection_rate": false_rejections / n,
        "expected_loss_proxy": fa * mean_amount,
    }
