"""Unit tests for the graph store, snapshots and read views."""

import random

import pytest

from app.core.exceptions import (
    CorruptSnapshotError,
    DanglingEndpointError,
    EmptySurfaceError,
    KindMismatchError,
    NonTitleIdError,
    ReadOnlyGraphError,
    SchemaViolationError,
    SnapshotIOError,
    SnapshotVersionError,
    UnknownEntityError,
)
from app.extraction import ExtractionResult, PaperExtraction
from app.graph import (
    GraphStore,
    InsertOutcome,
    load_snapshot,
    paper_view,
    parse_snapshot,
    render_stats,
    save_snapshot,
    serialize_snapshot,
)
from app.ontology import SIGNATURES, Direction, EntityKind, RelationKind, canonical_path

K = EntityKind
R = RelationKind


@pytest.fixture
def small_store() -> GraphStore:
    """Two papers sharing a task, one citing the other."""
    store = GraphStore(corpus_hash="c0ffee", pipeline_version="test")
    a = store.upsert_entity(K.TITLE, "Paper A", ["A"])
    b = store.upsert_entity(K.TITLE, "Paper B", ["B"])
    task = store.upsert_entity(K.TASK, "parsing", ["A", "B"])
    method = store.upsert_entity(K.METHOD, "A chart parser.", ["A"])
    author = store.upsert_entity(K.AUTHOR, "Ann", ["A"])
    store.insert_triple(a, R.WORKS_ON, task)
    store.insert_triple(b, R.WORKS_ON, task)
    store.insert_triple(a, R.ADOPTS, method)
    store.insert_triple(author, R.WRITES, a)
    store.insert_triple(a, R.DIRECT_USE, b)
    return store


def random_store(rng: random.Random) -> GraphStore:
    """A schema-valid store with random kinds, provenance, triples and deletions."""
    store = GraphStore(corpus_hash=f"{rng.getrandbits(64):016x}", pipeline_version="test")
    papers = [f"P{i}" for i in range(6)]
    kinds = list(EntityKind)
    for number in range(rng.randint(5, 40)):
        kind = rng.choice(kinds)
        provenance = rng.sample(papers, rng.randint(0, 3))
        store.upsert_entity(kind, f"{kind.value} {number}\t#{rng.randint(0, 9)}", provenance)
    by_kind: dict[EntityKind, list[int]] = {}
    for record in store.iter_entities():
        by_kind.setdefault(record.kind, []).append(record.entity_id)
    shapes = [(r, s, o) for r in RelationKind for s, o in SIGNATURES[r]]
    for _ in range(rng.randint(0, 60)):
        relation, s_kind, o_kind = rng.choice(shapes)
        if s_kind not in by_kind or o_kind not in by_kind:
            continue
        subject, obj = rng.choice(by_kind[s_kind]), rng.choice(by_kind[o_kind])
        if relation.is_inter_paper and subject == obj:
            continue
        store.insert_triple(subject, relation, obj)
    for record in list(store.iter_entities()):
        if rng.random() < 0.1:
            store.remove_entity(record.entity_id)
    return store


def entity_rows(store: GraphStore) -> list[tuple[int, EntityKind, str, set[str]]]:
    return [(e.entity_id, e.kind, e.surface, set(e.provenance)) for e in store.iter_entities()]


class TestEntities:
    """Tests for entity interning."""

    def test_upsert_interns_and_unions_provenance(self):
        """Same (kind, surface) returns the same id."""
        store = GraphStore()
        first = store.upsert_entity(K.DATASET, "SQuAD", ["A"])
        second = store.upsert_entity(K.DATASET, "SQuAD", ["B"])
        assert first == second
        assert store.entity(first).provenance == {"A", "B"}

    def test_kind_is_part_of_identity(self):
        """One surface under two kinds is two entities."""
        store = GraphStore()
        assert store.upsert_entity(K.TASK, "parsing") != store.upsert_entity(K.FIELD, "parsing")

    def test_empty_surface(self):
        """Blank surfaces are rejected."""
        with pytest.raises(EmptySurfaceError):
            GraphStore().upsert_entity(K.TASK, "  ")

    def test_normalized_lookup(self, small_store):
        """Lookup ignores case, spacing and trailing punctuation."""
        ids = small_store.lookup_normalized(K.TASK, "  Parsing. ")
        assert ids == [small_store.find_entity(K.TASK, "parsing")]

    def test_unknown_entity(self):
        """Unknown ids raise."""
        with pytest.raises(UnknownEntityError):
            GraphStore().entity(99)

    def test_title_for_paper(self, small_store):
        """Titles are indexed by their paper."""
        assert small_store.title_for_paper("B") == small_store.find_entity(K.TITLE, "Paper B")
        assert small_store.paper_ids() == ["A", "B"]


class TestTriples:
    """Tests for triple insertion."""

    def test_duplicate_triple(self, small_store):
        """Inserting a stored triple reports a duplicate."""
        a = small_store.find_entity(K.TITLE, "Paper A")
        task = small_store.find_entity(K.TASK, "parsing")
        assert small_store.insert_triple(a, R.WORKS_ON, task) is InsertOutcome.DUPLICATE
        assert small_store.triple_count == 5

    def test_schema_violation(self, small_store):
        """Illegal shapes are refused."""
        task = small_store.find_entity(K.TASK, "parsing")
        method = small_store.find_entity(K.METHOD, "A chart parser.")
        with pytest.raises(SchemaViolationError):
            small_store.insert_triple(task, R.ADOPTS, method)

    def test_dangling_endpoint(self, small_store):
        """Both endpoints must exist."""
        with pytest.raises(DanglingEndpointError):
            small_store.insert_triple(1, R.WORKS_ON, 999)

    def test_inter_paper_self_loop(self, small_store):
        """A paper cannot cite itself through an inter-paper relation."""
        a = small_store.find_entity(K.TITLE, "Paper A")
        with pytest.raises(SchemaViolationError):
            small_store.insert_triple(a, R.TASK_RELATED, a)

    def test_ingest_reorients_and_deduplicates(self):
        """Reversed shapes are flipped; re-ingest adds nothing."""
        paper = PaperExtraction("A")
        title = paper.add_entity(K.TITLE, "T", "metadata")
        venue = paper.add_entity(K.CONFERENCE, "ACL", "metadata")
        paper.add_triple(venue, R.PUBLISHES, title, "metadata")
        result = ExtractionResult([paper])
        store = GraphStore()
        report = store.ingest(result)
        assert report.triples_reoriented == 1
        assert store.has_triple(store.find_entity(K.TITLE, "T"), R.PUBLISHES, 2)
        again = store.ingest(result)
        assert (again.entities_created, again.triples_inserted) == (0, 0)

    def test_cited_title_gets_no_provenance(self):
        """The citing paper does not claim the cited title."""
        paper = PaperExtraction("A")
        title = paper.add_entity(K.TITLE, "T", "metadata")
        cited = paper.add_entity(K.TITLE, "U", "metadata")
        paper.entities.pop()
        paper.add_triple(title, R.DIRECT_USE, cited, "citations")
        store = GraphStore()
        store.ingest(ExtractionResult([paper]))
        assert store.entity(store.find_entity(K.TITLE, "U")).provenance == set()

    def test_ingest_drops_shared_title_self_loop(self):
        """Papers sharing a title intern to one node; their link is dropped and counted."""
        first = PaperExtraction("A")
        first.add_entity(K.TITLE, "Graph Reasoning over Papers", "metadata")
        second = PaperExtraction("B")
        title = second.add_entity(K.TITLE, "Graph Reasoning over Papers", "metadata")
        second.add_triple(title, R.DIRECT_USE, title, "citations")
        store = GraphStore()
        report = store.ingest(ExtractionResult([first, second]))
        assert report.self_loops_dropped == 1
        assert report.triples_inserted == 0
        node = store.find_entity(K.TITLE, "Graph Reasoning over Papers")
        assert store.entity(node).provenance == {"A", "B"}
        assert store.stats().relation_counts[R.DIRECT_USE] == 0
        store.check_integrity()


class TestQueries:
    """Tests for neighbours, path walks and inter-paper edges."""

    def test_neighbors_by_direction(self, small_store):
        """Inbound works_on from a task reaches both titles."""
        task = small_store.find_entity(K.TASK, "parsing")
        titles = small_store.neighbors(task, R.WORKS_ON, Direction.INBOUND)
        assert [small_store.entity(i).surface for i in titles] == ["Paper A", "Paper B"]
        assert small_store.neighbors(task, R.WORKS_ON, Direction.OUTBOUND) == []

    def test_walk_path(self, small_store):
        """Task to Method follows works_on then adopts."""
        task = small_store.find_entity(K.TASK, "parsing")
        found = small_store.walk_path(task, canonical_path(K.TASK, K.METHOD))
        assert [small_store.entity(i).surface for i in found] == ["A chart parser."]

    def test_walk_path_without_full_scans(self, small_store):
        """Path walks use adjacency only."""
        task = small_store.find_entity(K.TASK, "parsing")
        scans = small_store.scan_count
        small_store.walk_path(task, canonical_path(K.TASK, K.AUTHOR))
        assert small_store.scan_count == scans

    def test_walk_path_kind_mismatch(self, small_store):
        """The start entity must be of the path's source kind."""
        method = small_store.find_entity(K.METHOD, "A chart parser.")
        with pytest.raises(KindMismatchError):
            small_store.walk_path(method, canonical_path(K.TASK, K.METHOD))

    def test_inter_paper_edges(self, small_store):
        """Only edges with both ends in the set are returned."""
        a = small_store.find_entity(K.TITLE, "Paper A")
        b = small_store.find_entity(K.TITLE, "Paper B")
        assert [t.relation for t in small_store.inter_paper_edges([a, b])] == [R.DIRECT_USE]
        assert small_store.inter_paper_edges([a]) == []

    def test_inter_paper_edges_need_titles(self, small_store):
        """Non-title ids are rejected."""
        with pytest.raises(NonTitleIdError):
            small_store.inter_paper_edges([small_store.find_entity(K.TASK, "parsing")])

    def test_stats(self, small_store):
        """Counts cover every kind and relation, zeros included."""
        stats = small_store.stats()
        assert len(stats.entity_counts) == 15
        assert stats.entity_counts[K.TITLE] == 2
        assert stats.relation_counts[R.FACES] == 0
        assert stats.total_triples == 5
        assert "total" in render_stats(stats)


class TestRewrites:
    """Tests for removal, merging and renaming."""

    def test_remove_entity_drops_triples(self, small_store):
        """Removing a task removes both works_on triples."""
        removed = small_store.remove_entity(small_store.find_entity(K.TASK, "parsing"))
        assert len(removed) == 2
        assert small_store.triple_count == 3
        small_store.check_integrity()

    def test_rename_keeps_id(self, small_store):
        """Renaming to a free surface keeps the id."""
        task = small_store.find_entity(K.TASK, "parsing")
        assert small_store.rename_entity(task, "syntactic parsing") == task
        assert small_store.find_entity(K.TASK, "parsing") is None
        assert small_store.lookup_normalized(K.TASK, "Syntactic Parsing") == [task]

    def test_merge_kinds_must_match(self, small_store):
        """Different kinds cannot merge."""
        with pytest.raises(KindMismatchError):
            small_store.merge_entities(
                small_store.find_entity(K.TASK, "parsing"),
                small_store.find_entity(K.METHOD, "A chart parser."),
            )

    def test_merging_titles_drops_self_loop(self, small_store):
        """Folding B into A collapses their citation."""
        a = small_store.find_entity(K.TITLE, "Paper A")
        b = small_store.find_entity(K.TITLE, "Paper B")
        collapsed = small_store.merge_entities(b, a)
        assert collapsed == 2
        assert small_store.inter_paper_edges([a]) == []
        assert small_store.title_for_paper("B") == a

    def test_frozen_store(self, small_store):
        """A frozen store refuses writes."""
        small_store.freeze()
        with pytest.raises(ReadOnlyGraphError):
            small_store.upsert_entity(K.TASK, "tagging")
        with pytest.raises(ReadOnlyGraphError):
            small_store.remove_entity(1)


class TestSnapshots:
    """Tests for the snapshot file."""

    def test_save_and_load(self, small_store, tmp_path):
        """Loading restores ids, provenance, triples and header fields."""
        path = tmp_path / "graph.snap"
        saved = save_snapshot(small_store, path)
        loaded = load_snapshot(path)
        assert loaded.checksum == saved.checksum
        assert loaded.corpus_hash == "c0ffee"
        assert loaded.store.frozen
        assert loaded.stats.to_dict() == small_store.stats().to_dict()
        task = loaded.store.find_entity(K.TASK, "parsing")
        assert task == small_store.find_entity(K.TASK, "parsing")
        assert loaded.store.entity(task).provenance == {"A", "B"}
        assert serialize_snapshot(loaded.store) == path.read_text(encoding="utf-8")

    def test_surfaces_with_tabs_and_newlines(self, tmp_path):
        """Control characters in surfaces survive."""
        store = GraphStore()
        store.upsert_entity(K.METHOD, "line one\nline\ttwo \\ end", ["A"])
        loaded = parse_snapshot(serialize_snapshot(store))
        assert loaded.store.find_entity(K.METHOD, "line one\nline\ttwo \\ end") == 1

    def test_next_id_survives_deletions(self, small_store):
        """Ids are never reused after a reload."""
        small_store.remove_entity(small_store.find_entity(K.AUTHOR, "Ann"))
        loaded = parse_snapshot(serialize_snapshot(small_store), frozen=False)
        assert loaded.store.upsert_entity(K.AUTHOR, "Bob") == 6

    def test_checksum_mismatch(self, small_store):
        """Edited bodies are detected."""
        text = serialize_snapshot(small_store).replace("Paper A", "Paper Z")
        with pytest.raises(CorruptSnapshotError):
            parse_snapshot(text)

    def test_wrong_version(self, small_store):
        """Unknown format versions are refused."""
        text = serialize_snapshot(small_store).replace("AKG-SNAPSHOT\t1", "AKG-SNAPSHOT\t9", 1)
        with pytest.raises(SnapshotVersionError):
            parse_snapshot(text)

    def test_not_a_snapshot(self):
        """Arbitrary text is corrupt."""
        with pytest.raises(CorruptSnapshotError):
            parse_snapshot("hello\n")

    def test_missing_file(self, tmp_path):
        """Unreadable files raise an io error."""
        with pytest.raises(SnapshotIOError):
            load_snapshot(tmp_path / "missing.snap")

    @pytest.mark.parametrize("seed", range(20))
    def test_random_graphs_round_trip(self, seed, tmp_path):
        """Ids, provenance, triples and stats survive a save and load."""
        store = random_store(random.Random(seed))
        path = tmp_path / "graph.snap"
        save_snapshot(store, path)
        loaded = load_snapshot(path)
        assert entity_rows(loaded.store) == entity_rows(store)
        assert sorted(loaded.store.iter_triples()) == sorted(store.iter_triples())
        assert loaded.stats.to_dict() == store.stats().to_dict()
        assert loaded.store.next_id == store.next_id
        assert serialize_snapshot(loaded.store) == path.read_text(encoding="utf-8")

    def test_truncated_body(self, small_store, tmp_path):
        """A file cut anywhere inside the body is corrupt."""
        text = serialize_snapshot(small_store)
        body_start = text.index("\nE\t") + 1
        path = tmp_path / "cut.snap"
        for cut in range(body_start, len(text) - 1, 7):
            path.write_text(text[:cut], encoding="utf-8")
            with pytest.raises(CorruptSnapshotError):
                load_snapshot(path)

    def test_truncated_header(self, small_store, tmp_path):
        """A file cut inside the header is corrupt."""
        text = serialize_snapshot(small_store)
        header_start = text.index("\n") + 1
        body_start = text.index("\nE\t") + 1
        path = tmp_path / "cut.snap"
        for cut in range(header_start, body_start):
            path.write_text(text[:cut], encoding="utf-8")
            with pytest.raises(CorruptSnapshotError):
                load_snapshot(path)


class TestPaperView:
    """Tests for the paper view."""

    def test_elements_and_cited_titles(self, small_store):
        """Elements are grouped by kind; linked titles appear under Title."""
        view = paper_view(small_store, "A")
        assert view["title"]["surface"] == "Paper A"
        assert [e["surface"] for e in view["elements"]["Task"]] == ["parsing"]
        assert [e["surface"] for e in view["elements"]["Author"]] == ["Ann"]
        assert [e["surface"] for e in view["elements"]["Title"]] == ["Paper B"]
        assert "Dataset" not in view["elements"]

    def test_unknown_paper(self, small_store):
        """Unknown corpus ids raise."""
        with pytest.raises(UnknownEntityError):
            paper_view(small_store, "Z")
