"""Unit tests for the ontology module."""

import itertools

import pytest

from app.core.exceptions import SchemaViolationError
from app.ontology import (
    SIGNATURES,
    Direction,
    EntityKind,
    RelationClass,
    RelationKind,
    canonical_path,
    export_schema,
    is_valid_triple,
    normalize_direction,
    signature_count,
    validate_triple,
)

K = EntityKind
R = RelationKind


class TestKinds:
    """Tests for entity and relation kinds."""

    def test_fifteen_entity_kinds(self):
        """Fifteen entity kinds are defined."""
        assert len(EntityKind) == 15

    def test_seventeen_relations_two_inter_paper(self):
        """Only direct use and task related are inter-paper."""
        assert len(RelationKind) == 17
        inter = {r for r in RelationKind if r.relation_class is RelationClass.INTER_PAPER}
        assert inter == {R.DIRECT_USE, R.TASK_RELATED}

    @pytest.mark.parametrize(
        "name,expected",
        [
            ("methods", K.METHOD),
            ("Dataset", K.DATASET),
            ("TASKS", K.TASK),
            ("research field", K.FIELD),
        ],
    )
    def test_entity_kind_parse_tolerates_case_and_plurals(self, name, expected):
        """Kind names parse case-insensitively, with plurals."""
        assert EntityKind.parse(name) is expected

    def test_entity_kind_parse_rejects_unknown(self):
        """Unknown kind names raise ValueError."""
        with pytest.raises(ValueError):
            EntityKind.parse("algorithm")

    @pytest.mark.parametrize(
        "name,expected",
        [
            ("works on", R.WORKS_ON),
            ("Direct use", R.DIRECT_USE),
            ("date", R.IS_WRITTEN_IN),
            ("task correlation", R.TASK_RELATED),
            ("experiments_on", R.EXPERIMENTS_ON),
        ],
    )
    def test_relation_parse_accepts_display_names_and_aliases(self, name, expected):
        """Relation names parse from ids, display names and aliases."""
        assert RelationKind.parse(name) is expected


class TestSignatures:
    """Tests for the signature table."""

    def test_twenty_nine_signatures(self):
        """The table holds 29 legal signatures."""
        assert signature_count() == 29
        assert sum(len(pairs) for pairs in SIGNATURES.values()) == 29

    def test_every_relation_has_a_signature(self):
        """No relation is left without a legal shape."""
        assert all(SIGNATURES[relation] for relation in RelationKind)

    def test_valid_triple(self):
        """Title adopts Method is legal."""
        assert is_valid_triple(K.TITLE, R.ADOPTS, K.METHOD)
        validate_triple(K.METHOD, R.SOLVES, K.PROBLEM)

    def test_schema_violation_carries_shape_and_legal_signatures(self):
        """An illegal shape raises with its details."""
        with pytest.raises(SchemaViolationError) as exc_info:
            validate_triple(K.DATASET, R.ADOPTS, K.METHOD)
        assert exc_info.value.code == "schema-violation"
        assert exc_info.value.details["shape"] == ["Dataset", "adopts", "Method"]
        assert exc_info.value.details["legal"] == [["Title", "Method"]]

    def test_inter_paper_relations_link_titles_only(self):
        """Direct use between a Title and a Method is illegal."""
        assert not is_valid_triple(K.TITLE, R.DIRECT_USE, K.METHOD)

    def test_normalize_direction_swaps_reversed_shape(self):
        """Conference publishes Title is flipped to Title publishes Conference."""
        assert normalize_direction(K.CONFERENCE, R.PUBLISHES, K.TITLE) == (
            K.TITLE,
            K.CONFERENCE,
            True,
        )
        assert normalize_direction(K.TITLE, R.PUBLISHES, K.CONFERENCE) == (
            K.TITLE,
            K.CONFERENCE,
            False,
        )

    def test_normalize_direction_rejects_illegal_shape(self):
        """Neither orientation legal raises SchemaViolationError."""
        with pytest.raises(SchemaViolationError):
            normalize_direction(K.DATASET, R.WRITES, K.METRIC)

    def test_every_shape_is_decided(self):
        """All 15 x 17 x 15 shapes agree with the signature table, both directions."""
        legal = 0
        for subject, relation, obj in itertools.product(EntityKind, RelationKind, EntityKind):
            expected = (subject, obj) in SIGNATURES[relation]
            assert is_valid_triple(subject, relation, obj) is expected
            if expected:
                legal += 1
                validate_triple(subject, relation, obj)
            else:
                with pytest.raises(SchemaViolationError):
                    validate_triple(subject, relation, obj)
            reversed_legal = (obj, subject) in SIGNATURES[relation]
            if expected or reversed_legal:
                oriented = normalize_direction(subject, relation, obj)
                assert (oriented[0], oriented[1]) in SIGNATURES[relation]
                assert oriented[2] is (not expected)
            else:
                with pytest.raises(SchemaViolationError):
                    normalize_direction(subject, relation, obj)
        assert legal == 29


class TestCanonicalPaths:
    """Tests for canonical path resolution."""

    def test_task_to_method(self):
        """Task reaches Method through its Title."""
        path = canonical_path(K.TASK, K.METHOD)
        assert [(h.relation, h.direction) for h in path.hops] == [
            (R.WORKS_ON, Direction.INBOUND),
            (R.ADOPTS, Direction.OUTBOUND),
        ]
        assert path.kinds() == [K.TASK, K.TITLE, K.METHOD]

    def test_author_to_problem(self):
        """Author reaches Problem via writes then solves."""
        path = canonical_path(K.AUTHOR, K.PROBLEM)
        assert [(h.relation, h.direction) for h in path.hops] == [
            (R.WRITES, Direction.OUTBOUND),
            (R.SOLVES, Direction.OUTBOUND),
        ]

    def test_title_source_is_one_hop(self):
        """A Title source takes a single hop."""
        path = canonical_path(K.TITLE, K.DATASET)
        assert len(path.hops) == 1
        assert path.target is K.DATASET

    def test_title_to_title_is_zero_hops(self):
        """(Title, Title) needs no hop."""
        assert canonical_path(K.TITLE, K.TITLE).hops == ()

    def test_institution_goes_through_authors(self):
        """Institution pivots through Author to reach Title."""
        path = canonical_path(K.INSTITUTION, K.MODEL)
        assert path.kinds() == [K.INSTITUTION, K.AUTHOR, K.TITLE, K.MODEL]

    def test_every_pair_has_exactly_one_title_pivot(self):
        """All built-in pairs resolve through a single Title node."""
        for source in EntityKind:
            for target in EntityKind:
                if K.TITLE in (source, target):
                    continue
                path = canonical_path(source, target)
                path.validate()
                assert path.kinds().count(K.TITLE) == 1


class TestExportSchema:
    """Tests for the schema document."""

    def test_schema_document_counts(self):
        """The document lists 15 kinds, 17 relations and 29 signatures."""
        document = export_schema()
        assert len(document["entity_kinds"]) == 15
        assert len(document["relations"]) == 17
        assert document["signature_count"] == 29
        assert sum(len(r["signatures"]) for r in document["relations"]) == 29

    def test_kinds_carry_introductions(self):
        """Every kind has a non-empty introduction."""
        assert all(kind["introduction"] for kind in export_schema()["entity_kinds"])
