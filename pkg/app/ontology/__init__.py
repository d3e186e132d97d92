"""Ontology: entity kinds, relation signatures and canonical paths."""

from app.ontology.kinds import (
    DISAMBIGUATION_KINDS,
    INTENT_KINDS,
    EntityKind,
    RelationClass,
    RelationKind,
)
from app.ontology.paths import Direction, Hop, PathSpec, canonical_path, from_title, to_title
from app.ontology.signatures import (
    SIGNATURES,
    export_schema,
    is_valid_triple,
    normalize_direction,
    relation_signatures,
    signature_count,
    validate_triple,
)

__all__ = [
    "DISAMBIGUATION_KINDS",
    "INTENT_KINDS",
    "EntityKind",
    "RelationClass",
    "RelationKind",
    "Direction",
    "Hop",
    "PathSpec",
    "canonical_path",
    "from_title",
    "to_title",
    "SIGNATURES",
    "export_schema",
    "is_valid_triple",
    "normalize_direction",
    "relation_signatures",
    "signature_count",
    "validate_triple",
]
