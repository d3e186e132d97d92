"""
Schema-enforcing triple store.

Entities are interned by (kind, surface). Adjacency is indexed in both
directions; every mutation keeps referential integrity and schema validity.
Reads used by path resolution are exact lookups and adjacency walks only;
``scan_count`` counts full scans so callers can assert that.
"""

import threading
from collections import defaultdict
from collections.abc import Iterable, Iterator
from typing import Any

from app.core.exceptions import (
    DanglingEndpointError,
    EmptySurfaceError,
    KindMismatchError,
    NonTitleIdError,
    ReadOnlyGraphError,
    SchemaViolationError,
    UnknownEntityError,
)
from app.extraction.models import ExtractionResult, TripleCandidate
from app.graph.models import EntityRecord, GraphStats, IngestReport, InsertOutcome, Triple
from app.ontology import (
    Direction,
    EntityKind,
    PathSpec,
    RelationKind,
    normalize_direction,
    validate_triple,
)
from app.utils import get_logger, normalize_surface

logger = get_logger(__name__)

Edge = tuple[RelationKind, int]


class GraphStore:
    """In-memory graph with many-readers-or-one-writer access."""

    def __init__(self, corpus_hash: str | None = None, pipeline_version: str | None = None):
        self.corpus_hash = corpus_hash
        self.pipeline_version = pipeline_version
        self.scan_count = 0
        self.lookup_count = 0
        self._entities: dict[int, EntityRecord] = {}
        self._by_key: dict[tuple[EntityKind, str], int] = {}
        self._by_normalized: dict[tuple[EntityKind, str], set[int]] = defaultdict(set)
        self._out: dict[int, set[Edge]] = defaultdict(set)
        self._in: dict[int, set[Edge]] = defaultdict(set)
        self._triples: set[Triple] = set()
        self._paper_titles: dict[str, int] = {}
        self._next_id = 1
        self._frozen = False
        self._lock = threading.RLock()

    # =========================================================================
    # STATE
    # =========================================================================

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "GraphStore":
        """Make the store read-only; mutations raise ReadOnlyGraphError."""
        self._frozen = True
        return self

    def _writable(self) -> None:
        if self._frozen:
            raise ReadOnlyGraphError("Graph store is read-only")

    @property
    def next_id(self) -> int:
        return self._next_id

    def __len__(self) -> int:
        return len(self._entities)

    @property
    def triple_count(self) -> int:
        return len(self._triples)

    # =========================================================================
    # ENTITIES
    # =========================================================================

    def upsert_entity(
        self, kind: EntityKind, surface: str, provenance: Iterable[str] = ()
    ) -> int:
        """
        Intern an entity.

        Returns:
            Existing id for (kind, surface) with provenance unioned, else a fresh id

        Raises:
            EmptySurfaceError: If surface is empty or blank
        """
        if not surface or not surface.strip():
            raise EmptySurfaceError(
                f"Empty surface for {kind.value} entity", details={"kind": kind.value}
            )
        with self._lock:
            self._writable()
            key = (kind, surface)
            entity_id = self._by_key.get(key)
            if entity_id is None:
                entity_id = self._next_id
                self._next_id += 1
                self._entities[entity_id] = EntityRecord(entity_id, kind, surface)
                self._by_key[key] = entity_id
                self._by_normalized[(kind, normalize_surface(surface))].add(entity_id)
            record = self._entities[entity_id]
            for corpus_id in provenance:
                record.provenance.add(corpus_id)
                if kind is EntityKind.TITLE:
                    self._paper_titles.setdefault(corpus_id, entity_id)
            return entity_id

    def restore_entity(
        self, entity_id: int, kind: EntityKind, surface: str, provenance: Iterable[str]
    ) -> None:
        """Insert an entity under a known id (snapshot loading)."""
        with self._lock:
            self._writable()
            if entity_id in self._entities or (kind, surface) in self._by_key:
                raise SchemaViolationError(f"Entity {entity_id} restored twice")
            if not surface:
                raise EmptySurfaceError(f"Empty surface for entity {entity_id}")
            self._entities[entity_id] = EntityRecord(entity_id, kind, surface)
            self._by_key[(kind, surface)] = entity_id
            self._by_normalized[(kind, normalize_surface(surface))].add(entity_id)
            self._next_id = max(self._next_id, entity_id + 1)
            for corpus_id in provenance:
                self._entities[entity_id].provenance.add(corpus_id)
                if kind is EntityKind.TITLE:
                    self._paper_titles.setdefault(corpus_id, entity_id)

    def set_next_id(self, next_id: int) -> None:
        with self._lock:
            self._next_id = max(self._next_id, next_id)

    def entity(self, entity_id: int) -> EntityRecord:
        try:
            return self._entities[entity_id]
        except KeyError:
            raise UnknownEntityError(
                f"Unknown entity id {entity_id}", details={"entity_id": entity_id}
            ) from None

    def has_entity(self, entity_id: int) -> bool:
        return entity_id in self._entities

    def find_entity(self, kind: EntityKind, surface: str) -> int | None:
        """Exact (kind, surface) lookup."""
        self.lookup_count += 1
        return self._by_key.get((kind, surface))

    def lookup_normalized(self, kind: EntityKind, surface: str) -> list[int]:
        """Entities of ``kind`` whose surface matches after normalization."""
        self.lookup_count += 1
        return sorted(self._by_normalized.get((kind, normalize_surface(surface)), ()))

    def title_for_paper(self, corpus_id: str) -> int | None:
        self.lookup_count += 1
        return self._paper_titles.get(corpus_id)

    def paper_ids(self) -> list[str]:
        return sorted(self._paper_titles)

    def iter_entities(self, kind: EntityKind | None = None) -> Iterator[EntityRecord]:
        """Full scan in ascending id order."""
        self.scan_count += 1
        for entity_id in sorted(self._entities):
            record = self._entities[entity_id]
            if kind is None or record.kind is kind:
                yield record

    # =========================================================================
    # TRIPLES
    # =========================================================================

    def insert_triple(
        self, subject_id: int, relation: RelationKind, object_id: int
    ) -> InsertOutcome:
        """
        Store a triple unless it already exists.

        Raises:
            DanglingEndpointError: If an endpoint is not in the store
            SchemaViolationError: Illegal signature or inter-paper self-loop
        """
        with self._lock:
            self._writable()
            for endpoint in (subject_id, object_id):
                if endpoint not in self._entities:
                    raise DanglingEndpointError(
                        f"Triple endpoint {endpoint} does not exist",
                        details={"entity_id": endpoint},
                    )
            subject = self._entities[subject_id]
            obj = self._entities[object_id]
            validate_triple(subject.kind, relation, obj.kind)
            if relation.is_inter_paper and subject_id == object_id:
                raise SchemaViolationError(
                    f"Inter-paper self-loop on '{subject.surface}'",
                    details={"entity_id": subject_id, "relation": relation.value},
                )
            triple = Triple(subject_id, relation, object_id)
            if triple in self._triples:
                return InsertOutcome.DUPLICATE
            self._triples.add(triple)
            self._out[subject_id].add((relation, object_id))
            self._in[object_id].add((relation, subject_id))
            return InsertOutcome.INSERTED

    def has_triple(self, subject_id: int, relation: RelationKind, object_id: int) -> bool:
        return Triple(subject_id, relation, object_id) in self._triples

    def iter_triples(self) -> Iterator[Triple]:
        """Full scan in (subject, relation, object) order."""
        self.scan_count += 1
        yield from sorted(self._triples)

    def _drop_triple(self, triple: Triple) -> None:
        self._triples.discard(triple)
        self._out[triple.subject_id].discard((triple.relation, triple.object_id))
        self._in[triple.object_id].discard((triple.relation, triple.subject_id))

    def edges_of(self, entity_id: int) -> list[Triple]:
        """All triples touching an entity."""
        self.entity(entity_id)
        triples = {Triple(entity_id, rel, other) for rel, other in self._out.get(entity_id, ())}
        triples |= {Triple(other, rel, entity_id) for rel, other in self._in.get(entity_id, ())}
        return sorted(triples)

    # =========================================================================
    # QUERIES
    # =========================================================================

    def neighbors(
        self,
        entity_id: int,
        relation: RelationKind | None = None,
        direction: Direction = Direction.BOTH,
    ) -> list[int]:
        """Adjacent ids under the filters, ascending."""
        self.entity(entity_id)
        found: set[int] = set()
        if direction in (Direction.OUTBOUND, Direction.BOTH):
            found |= {o for rel, o in self._out.get(entity_id, ()) if relation in (None, rel)}
        if direction in (Direction.INBOUND, Direction.BOTH):
            found |= {s for rel, s in self._in.get(entity_id, ()) if relation in (None, rel)}
        return sorted(found)

    def walk_path(self, start_id: int, path: PathSpec) -> list[int]:
        """
        Apply each hop breadth-first from ``start_id``.

        Raises:
            KindMismatchError: If the start entity is not of the path's source kind
        """
        start = self.entity(start_id)
        if start.kind is not path.source:
            raise KindMismatchError(
                f"Path starts at {path.source.value}, entity {start_id} is {start.kind.value}",
                details={"entity_id": start_id, "expected": path.source.value},
            )
        frontier = [start_id]
        for hop in path.hops:
            reached: set[int] = set()
            for node in frontier:
                for other in self.neighbors(node, hop.relation, hop.direction):
                    if self._entities[other].kind is hop.expected:
                        reached.add(other)
            frontier = sorted(reached)
            if not frontier:
                return []
        return frontier

    def inter_paper_edges(self, title_ids: Iterable[int]) -> list[Triple]:
        """
        Inter-paper triples with both endpoints in ``title_ids``.

        Raises:
            NonTitleIdError: If an id is not a Title entity
        """
        ids = set(title_ids)
        for entity_id in ids:
            if self.entity(entity_id).kind is not EntityKind.TITLE:
                raise NonTitleIdError(
                    f"Entity {entity_id} is not a Title", details={"entity_id": entity_id}
                )
        edges = {
            Triple(subject, rel, obj)
            for subject in ids
            for rel, obj in self._out.get(subject, ())
            if rel.is_inter_paper and obj in ids
        }
        return sorted(edges)

    def stats(self) -> GraphStats:
        entity_counts = dict.fromkeys(EntityKind, 0)
        for record in self._entities.values():
            entity_counts[record.kind] += 1
        relation_counts = dict.fromkeys(RelationKind, 0)
        for triple in self._triples:
            relation_counts[triple.relation] += 1
        return GraphStats(entity_counts, relation_counts)

    # =========================================================================
    # REWRITES
    # =========================================================================

    def remove_entity(self, entity_id: int) -> list[Triple]:
        """Delete an entity and its triples; returns the removed triples."""
        with self._lock:
            self._writable()
            record = self.entity(entity_id)
            removed = self.edges_of(entity_id)
            for triple in removed:
                self._drop_triple(triple)
            self._out.pop(entity_id, None)
            self._in.pop(entity_id, None)
            del self._entities[entity_id]
            del self._by_key[(record.kind, record.surface)]
            normalized = (record.kind, normalize_surface(record.surface))
            self._by_normalized[normalized].discard(entity_id)
            if not self._by_normalized[normalized]:
                del self._by_normalized[normalized]
            for corpus_id in record.provenance:
                if self._paper_titles.get(corpus_id) == entity_id:
                    del self._paper_titles[corpus_id]
            return removed

    def merge_entities(self, source_id: int, target_id: int) -> int:
        """
        Fold ``source_id`` into ``target_id``: triples are redirected and
        deduplicated, provenance is unioned, the source is removed.

        Returns:
            Number of triples that collapsed into existing ones
        """
        with self._lock:
            self._writable()
            if source_id == target_id:
                return 0
            source = self.entity(source_id)
            target = self.entity(target_id)
            if source.kind is not target.kind:
                raise KindMismatchError(
                    f"Cannot merge {source.kind.value} into {target.kind.value}"
                )
            triples = self.remove_entity(source_id)
            collapsed = 0
            for triple in triples:
                subject = target_id if triple.subject_id == source_id else triple.subject_id
                obj = target_id if triple.object_id == source_id else triple.object_id
                if triple.relation.is_inter_paper and subject == obj:
                    collapsed += 1
                    continue
                if self.insert_triple(subject, triple.relation, obj) is InsertOutcome.DUPLICATE:
                    collapsed += 1
            for corpus_id in source.provenance:
                target.provenance.add(corpus_id)
                if target.kind is EntityKind.TITLE:
                    self._paper_titles.setdefault(corpus_id, target_id)
            return collapsed

    def rename_entity(self, entity_id: int, surface: str) -> int:
        """
        Give an entity a new surface; merges into an existing (kind, surface).

        Returns:
            The id now carrying the surface
        """
        with self._lock:
            self._writable()
            record = self.entity(entity_id)
            if record.surface == surface:
                return entity_id
            if not surface.strip():
                raise EmptySurfaceError(f"Empty surface for entity {entity_id}")
            existing = self._by_key.get((record.kind, surface))
            if existing is not None:
                self.merge_entities(entity_id, existing)
                return existing
            del self._by_key[(record.kind, record.surface)]
            old_normalized = (record.kind, normalize_surface(record.surface))
            self._by_normalized[old_normalized].discard(entity_id)
            if not self._by_normalized[old_normalized]:
                del self._by_normalized[old_normalized]
            record.surface = surface
            self._by_key[(record.kind, surface)] = entity_id
            self._by_normalized[(record.kind, normalize_surface(surface))].add(entity_id)
            return entity_id

    # =========================================================================
    # INGEST
    # =========================================================================

    def ingest(self, result: ExtractionResult) -> IngestReport:
        """
        Load extraction candidates: entities are interned with their paper as
        provenance, triples are oriented, validated and deduplicated.

        Re-ingesting the same result adds nothing.
        """
        report = IngestReport()
        with self._lock:
            self._writable()
            for paper in result.papers:
                for candidate in paper.entities:
                    before = self._next_id
                    self.upsert_entity(candidate.kind, candidate.surface, [paper.corpus_id])
                    report.entities_seen += 1
                    report.entities_created += self._next_id - before
                for triple in [*paper.triples, *paper.inter_paper]:
                    self._ingest_triple(triple, paper.corpus_id, report)
        logger.info("candidates_ingested", **report.to_dict())
        return report

    def _ingest_triple(
        self, triple: TripleCandidate, corpus_id: str, report: IngestReport
    ) -> None:
        subject, obj = triple.subject, triple.object
        _, _, swapped = normalize_direction(subject.kind, triple.relation, obj.kind)
        if swapped:
            subject, obj = obj, subject
            report.triples_reoriented += 1
        ids = []
        for position, ref in enumerate((subject, obj)):
            before = self._next_id
            # A cited title belongs to another paper; it gets no provenance here.
            own = not (triple.relation.is_inter_paper and position == 1)
            ids.append(self.upsert_entity(ref.kind, ref.surface, [corpus_id] if own else []))
            report.entities_created += self._next_id - before
        if triple.relation.is_inter_paper and ids[0] == ids[1]:
            # Distinct papers sharing one title intern to the same node.
            report.self_loops_dropped += 1
            return
        outcome = self.insert_triple(ids[0], triple.relation, ids[1])
        if outcome is InsertOutcome.INSERTED:
            report.triples_inserted += 1
        else:
            report.triples_duplicate += 1

    def import_candidates(self, records: list[dict[str, Any]]) -> IngestReport:
        """Ingest a candidate dump written by ``ExtractionResult.to_records``."""
        return self.ingest(ExtractionResult.from_records(records))

    def check_integrity(self) -> None:
        """Full-scan check of referential integrity and schema validity."""
        for triple in self.iter_triples():
            subject = self.entity(triple.subject_id)
            obj = self.entity(triple.object_id)
            validate_triple(subject.kind, triple.relation, obj.kind)
