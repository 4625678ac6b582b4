"""Evaluation harness for information extraction from visually rich documents."""

__version__ = "0.1.0"

from .core import (
    ALL_SPLIT,
    BoundingBox,
    Dataset,
    Document,
    Entity,
    RelationTriplet,
    Segment,
    StatsReport,
    Violation,
    Word,
    box_union,
    dataset_stats,
    entity_box,
    row_clusters,
    validate_dataset,
    validate_document,
)

__all__ = [
    "ALL_SPLIT",
    "BoundingBox",
    "Dataset",
    "Document",
    "Entity",
    "RelationTriplet",
    "Segment",
    "StatsReport",
    "Violation",
    "Word",
    "box_union",
    "dataset_stats",
    "entity_box",
    "row_clusters",
    "validate_dataset",
    "validate_document",
    "__version__",
]
