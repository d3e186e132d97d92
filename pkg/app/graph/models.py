"""Graph store records."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from app.ontology import EntityKind, RelationKind


@dataclass
class EntityRecord:
    entity_id: int
    kind: EntityKind
    surface: str
    provenance: set[str] = field(default_factory=set)

    def to_dict(self) -> dict[str, Any]:
        return {
            "entity_id": self.entity_id,
            "kind": self.kind.value,
            "surface": self.surface,
            "provenance": sorted(self.provenance),
        }


@dataclass(frozen=True, order=True)
class Triple:
    subject_id: int
    relation: RelationKind
    object_id: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "subject_id": self.subject_id,
            "relation": self.relation.value,
            "object_id": self.object_id,
        }


class InsertOutcome(str, Enum):
    INSERTED = "inserted"
    DUPLICATE = "duplicate"


@dataclass
class GraphStats:
    entity_counts: dict[EntityKind, int]
    relation_counts: dict[RelationKind, int]

    @property
    def total_entities(self) -> int:
        return sum(self.entity_counts.values())

    @property
    def total_triples(self) -> int:
        return sum(self.relation_counts.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "entities": {kind.value: count for kind, count in self.entity_counts.items()},
            "relations": {rel.value: count for rel, count in self.relation_counts.items()},
            "total_entities": self.total_entities,
            "total_triples": self.total_triples,
        }


@dataclass
class IngestReport:
    """Counts from loading extraction candidates into a store."""

    entities_created: int = 0
    entities_seen: int = 0
    triples_inserted: int = 0
    triples_duplicate: int = 0
    triples_reoriented: int = 0
    self_loops_dropped: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "entities_created": self.entities_created,
            "entities_seen": self.entities_seen,
            "triples_inserted": self.triples_inserted,
            "triples_duplicate": self.triples_duplicate,
            "triples_reoriented": self.triples_reoriented,
            "self_loops_dropped": self.self_loops_dropped,
        }


def render_stats(stats: GraphStats) -> str:
    """Plain-text stats table."""
    width = max(len(k.value) for k in EntityKind) + 2
    lines = ["ENTITIES", "-" * (width + 10)]
    lines += [f"{kind.value:<{width}}{count:>10}" for kind, count in stats.entity_counts.items()]
    lines += [f"{'total':<{width}}{stats.total_entities:>10}", ""]
    rel_width = max(len(r.value) for r in RelationKind) + 2
    lines += ["RELATIONS", "-" * (rel_width + 10)]
    lines += [
        f"{relation.value:<{rel_width}}{count:>10}"
        for relation, count in stats.relation_counts.items()
    ]
    lines.append(f"{'total':<{rel_width}}{stats.total_triples:>10}")
    return "\n".join(lines)
