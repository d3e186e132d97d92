"""
Canonical query paths between entity kinds.

Every cross-element path pivots through exactly one Title node. The Title
link of each kind is its Title-endpoint signature; Institution has none and
reaches Title through its authors (Institution <-works_for- Author -writes-> Title).
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from app.core.exceptions import NoPathError, SchemaViolationError
from app.ontology.kinds import EntityKind, RelationKind
from app.ontology.signatures import SIGNATURES, is_valid_triple


class Direction(str, Enum):
    OUTBOUND = "outbound"
    INBOUND = "inbound"
    BOTH = "both"

    def flipped(self) -> "Direction":
        if self is Direction.OUTBOUND:
            return Direction.INBOUND
        if self is Direction.INBOUND:
            return Direction.OUTBOUND
        return self


@dataclass(frozen=True)
class Hop:
    relation: RelationKind
    direction: Direction
    expected: EntityKind

    def to_dict(self) -> dict[str, str]:
        return {
            "relation": self.relation.value,
            "direction": self.direction.value,
            "expected": self.expected.value,
        }


@dataclass(frozen=True)
class PathSpec:
    """Ordered hops starting at a node of kind ``source``."""

    source: EntityKind
    hops: tuple[Hop, ...]

    @property
    def target(self) -> EntityKind:
        return self.hops[-1].expected if self.hops else self.source

    def kinds(self) -> list[EntityKind]:
        """Node kinds visited, source first."""
        return [self.source, *(hop.expected for hop in self.hops)]

    def validate(self) -> None:
        """Check every hop against the signature table."""
        current = self.source
        for hop in self.hops:
            if hop.direction is Direction.BOTH:
                raise SchemaViolationError("Path hops must be outbound or inbound")
            subject, obj = (
                (current, hop.expected)
                if hop.direction is Direction.OUTBOUND
                else (hop.expected, current)
            )
            if not is_valid_triple(subject, hop.relation, obj):
                raise SchemaViolationError(
                    f"Hop {hop.relation.value} {hop.direction.value} "
                    f"from {current.value} to {hop.expected.value} is not a legal signature"
                )
            current = hop.expected

    def to_dict(self) -> dict[str, object]:
        return {"source": self.source.value, "hops": [hop.to_dict() for hop in self.hops]}


def _title_link(kind: EntityKind) -> tuple[Hop, ...]:
    """Hops from ``kind`` to Title using the lowest-arity Title-endpoint relation."""
    candidates: list[tuple[int, str, Hop]] = []
    for relation, pairs in SIGNATURES.items():
        if relation.is_inter_paper:
            continue
        if (EntityKind.TITLE, kind) in pairs:
            candidates.append(
                (len(pairs), relation.value, Hop(relation, Direction.INBOUND, EntityKind.TITLE))
            )
        if (kind, EntityKind.TITLE) in pairs:
            candidates.append(
                (len(pairs), relation.value, Hop(relation, Direction.OUTBOUND, EntityKind.TITLE))
            )
    if candidates:
        return (min(candidates, key=lambda c: (c[0], c[1]))[2],)
    if kind is EntityKind.INSTITUTION:
        return (
            Hop(RelationKind.WORKS_FOR, Direction.INBOUND, EntityKind.AUTHOR),
            Hop(RelationKind.WRITES, Direction.OUTBOUND, EntityKind.TITLE),
        )
    raise NoPathError(f"No relation links {kind.value} to Title", details={"kind": kind.value})


def _reverse(source: EntityKind, hops: tuple[Hop, ...]) -> tuple[Hop, ...]:
    """Reverse a hop chain that starts at ``source``."""
    kinds = [source, *(hop.expected for hop in hops)]
    reversed_hops = []
    for index in range(len(hops) - 1, -1, -1):
        hop = hops[index]
        reversed_hops.append(Hop(hop.relation, hop.direction.flipped(), kinds[index]))
    return tuple(reversed_hops)


@lru_cache(maxsize=None)
def to_title(kind: EntityKind) -> tuple[Hop, ...]:
    """Hops from a node of ``kind`` to its Title; empty for Title itself."""
    if kind is EntityKind.TITLE:
        return ()
    return _title_link(kind)


@lru_cache(maxsize=None)
def from_title(kind: EntityKind) -> tuple[Hop, ...]:
    """Hops from a Title to the nodes of ``kind``; empty for Title itself."""
    if kind is EntityKind.TITLE:
        return ()
    return _reverse(kind, _title_link(kind))


@lru_cache(maxsize=None)
def canonical_path(source_kind: EntityKind, target_kind: EntityKind) -> PathSpec:
    """
    Retrieval-free path source -> Title -> target.

    Args:
        source_kind: Kind of the matched question element
        target_kind: Kind the question asks for

    Returns:
        PathSpec; (Title, Title) gives a zero-hop path

    Raises:
        NoPathError: If a kind has no Title link
    """
    path = PathSpec(source_kind, to_title(source_kind) + from_title(target_kind))
    path.validate()
    return path
