"""Legal (source, target) signatures per relation and triple validation."""

from typing import Any

from app.core.exceptions import SchemaViolationError
from app.ontology.kinds import (
    ENTITY_INTRODUCTIONS,
    EntityKind,
    RelationKind,
)

K = EntityKind
R = RelationKind

Signature = tuple[EntityKind, EntityKind]

SIGNATURES: dict[RelationKind, frozenset[Signature]] = {
    R.WRITES: frozenset({(K.AUTHOR, K.TITLE)}),
    R.WORKS_FOR: frozenset({(K.AUTHOR, K.INSTITUTION)}),
    R.PUBLISHES: frozenset({(K.TITLE, K.CONFERENCE)}),
    R.IS_WRITTEN_IN: frozenset({(K.TITLE, K.DATE)}),
    R.BELONGS_TO: frozenset({(K.TITLE, K.FIELD)}),
    R.KEYWORDS: frozenset({(K.TITLE, K.KEYWORDS)}),
    R.SOLVES: frozenset({(K.TITLE, K.PROBLEM), (K.METHOD, K.PROBLEM), (K.MODEL, K.PROBLEM)}),
    R.ADOPTS: frozenset({(K.TITLE, K.METHOD)}),
    R.PROPOSES: frozenset({(K.TITLE, K.MODEL), (K.METHOD, K.MODEL)}),
    R.WORKS_ON: frozenset({(K.TITLE, K.TASK), (K.METHOD, K.TASK), (K.MODEL, K.TASK)}),
    R.INNOVATES: frozenset({(K.TITLE, K.INNOVATION), (K.METHOD, K.INNOVATION)}),
    R.EXPERIMENTS_ON: frozenset({(K.TITLE, K.DATASET), (K.TASK, K.DATASET), (K.MODEL, K.DATASET)}),
    R.USES: frozenset({(K.TITLE, K.METRIC), (K.TASK, K.METRIC), (K.MODEL, K.METRIC)}),
    R.FACES: frozenset({(K.TASK, K.PROBLEM)}),
    R.ACHIEVES: frozenset({(K.TITLE, K.RESULT), (K.METHOD, K.RESULT), (K.MODEL, K.RESULT)}),
    R.DIRECT_USE: frozenset({(K.TITLE, K.TITLE)}),
    R.TASK_RELATED: frozenset({(K.TITLE, K.TITLE)}),
}

SCHEMA_VERSION = "akg-schema/1"


def relation_signatures(kind: RelationKind) -> frozenset[Signature]:
    """Exact legal (source, target) pairs for a relation."""
    return SIGNATURES[kind]


def signature_count() -> int:
    return sum(len(pairs) for pairs in SIGNATURES.values())


def is_valid_triple(
    subject_kind: EntityKind, relation: RelationKind, object_kind: EntityKind
) -> bool:
    return (subject_kind, object_kind) in SIGNATURES[relation]


def validate_triple(
    subject_kind: EntityKind, relation: RelationKind, object_kind: EntityKind
) -> None:
    """
    Check a triple shape against the signature table.

    Raises:
        SchemaViolationError: With the offending shape and the legal signatures
    """
    if is_valid_triple(subject_kind, relation, object_kind):
        return
    raise SchemaViolationError(
        f"({subject_kind.value}, {relation.value}, {object_kind.value}) "
        f"is not a legal signature of {relation.value}",
        details={
            "shape": [subject_kind.value, relation.value, object_kind.value],
            "legal": sorted([s.value, t.value] for s, t in SIGNATURES[relation]),
        },
    )


def normalize_direction(
    subject_kind: EntityKind, relation: RelationKind, object_kind: EntityKind
) -> tuple[EntityKind, EntityKind, bool]:
    """
    Orient a triple shape to its legal direction.

    Returns:
        (subject_kind, object_kind, swapped). A reversed but otherwise legal
        shape, such as Conference publishes Title, comes back swapped.

    Raises:
        SchemaViolationError: If neither orientation is legal
    """
    if is_valid_triple(subject_kind, relation, object_kind):
        return subject_kind, object_kind, False
    if is_valid_triple(object_kind, relation, subject_kind):
        return object_kind, subject_kind, True
    validate_triple(subject_kind, relation, object_kind)
    raise AssertionError("unreachable")


def export_schema() -> dict[str, Any]:
    """Self-describing schema document for introspection."""
    return {
        "version": SCHEMA_VERSION,
        "entity_kinds": [
            {"name": kind.value, "introduction": ENTITY_INTRODUCTIONS[kind]} for kind in EntityKind
        ],
        "relations": [
            {
                "name": relation.value,
                "display_name": relation.display_name,
                "class": relation.relation_class.value,
                "signatures": sorted([s.value, t.value] for s, t in SIGNATURES[relation]),
            }
            for relation in RelationKind
        ],
        "signature_count": signature_count(),
    }
