"""Credit-decision tool: dataset handling, tree induction, scoring, metrics."""

from .schema import Dataset, IngestReport, ingest_csv, validate_application
from .tree import (
    DecisionTree,
    TrainingConfig,
    deserialize_tree,
    score,
    serialize_tree,
    train,
    validate_tree,
)
from .metrics import compute_validation_metrics

__all__ = [
    "Dataset",
    "DecisionTree",
    "IngestReport",
    "TrainingConfig",
    "compute_validation_metrics",
    "deserialize_tree",
    "ingest_csv",
    "score",
    "serialize_tree",
    "train",
    "validate_application",
    "validate_tree",
]
