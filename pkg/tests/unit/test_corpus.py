"""Unit tests for corpus parsing and validation."""

import json

import pytest

from app.core.exceptions import (
    CorpusIOError,
    CorpusParseError,
    DuplicateCorpusIdError,
    MissingFieldError,
)
from app.corpus import (
    PaperRecord,
    corpus_hash,
    load_corpus,
    parse_paper_record,
    resolve_citations,
    serialize_paper_record,
    validate_corpus,
    write_corpus,
)


def _paper(corpus_id: str, title: str, **fields) -> PaperRecord:
    return PaperRecord.model_validate({"corpus_id": corpus_id, "title": title, **fields})


class TestParsing:
    """Tests for one-line record parsing."""

    def test_parse_full_record(self):
        """Tables and citations use their wire aliases."""
        record = parse_paper_record(
            json.dumps(
                {
                    "corpus_id": "A",
                    "title": "  Paper A ",
                    "authors": ["Ann", {"name": "Bob", "institution": ""}],
                    "tables": [{"index": 3, "caption": "Main", "cells": [["x", 1.5, None]]}],
                    "citations": [{"context": "We use B.", "cited_title": "Paper B"}],
                }
            )
        )
        assert record.title == "Paper A"
        assert record.authors[0].name == "Ann"
        assert record.authors[1].institution is None
        assert record.tables[0].table_index == 3
        assert record.tables[0].cells == [["x", "1.5", ""]]
        assert record.citations[0].context_text == "We use B."

    def test_serialize_parse_is_a_fixed_point(self):
        """parse(serialize(r)) == r, resolved ids included."""
        record = _paper(
            "A",
            "Paper A",
            citations=[{"context": "ctx", "cited_title": "B", "resolved_id": "B"}],
        )
        assert parse_paper_record(serialize_paper_record(record)) == record

    def test_missing_title(self):
        """A record without a title is rejected with the field name."""
        with pytest.raises(MissingFieldError) as exc_info:
            parse_paper_record('{"corpus_id": "A", "title": "  "}', line_number=4)
        assert exc_info.value.code == "missing-required-field"
        assert exc_info.value.details == {"line": 4, "field": "title"}

    def test_malformed_json(self):
        """Broken JSON is a parse error."""
        with pytest.raises(CorpusParseError):
            parse_paper_record("{not json")

    def test_blank_citation_context_rejected(self):
        """A citation with whitespace-only context is invalid."""
        with pytest.raises(CorpusParseError):
            parse_paper_record(
                json.dumps(
                    {
                        "corpus_id": "A",
                        "title": "T",
                        "citations": [{"context": "   ", "cited_title": "B"}],
                    }
                )
            )

    def test_duplicate_table_index_rejected(self):
        """Table indexes are unique within a record."""
        with pytest.raises(CorpusParseError):
            parse_paper_record(
                json.dumps(
                    {"corpus_id": "A", "title": "T", "tables": [{"index": 1}, {"index": 1}]}
                )
            )

    @pytest.mark.parametrize(
        "date,year,month",
        [("2012 December", 2012, 12), ("Sept 2019", 2019, 9), ("unknown", None, None)],
    )
    def test_year_and_month(self, date, year, month):
        """Year and month come from the raw date string."""
        record = _paper("A", "T", date=date)
        assert (record.year, record.month) == (year, month)


class TestCorpusFiles:
    """Tests for loading and writing corpus files."""

    def test_load_fixture_corpus(self, corpus_path):
        """The fixture corpus has three papers in file order."""
        records = load_corpus(corpus_path)
        assert [r.corpus_id for r in records] == ["P1", "P2", "P3"]

    def test_missing_file(self, tmp_path):
        """An unreadable corpus raises an io error."""
        with pytest.raises(CorpusIOError):
            load_corpus(tmp_path / "absent.ndjson")

    def test_write_then_load(self, tmp_path, corpus_path):
        """Written corpora load back equal and hash the same."""
        records = load_corpus(corpus_path)
        out = tmp_path / "nested" / "corpus.ndjson"
        write_corpus(out, records)
        again = load_corpus(out)
        assert again == records
        assert corpus_hash(again) == corpus_hash(records)


class TestValidation:
    """Tests for citation resolution and the corpus report."""

    def test_resolution_by_normalized_title(self, corpus_path):
        """Citations resolve by title after casefolding and punctuation stripping."""
        records = resolve_citations(load_corpus(corpus_path))
        resolved = [c.resolved_id for c in records[0].citations]
        assert resolved == ["P2", "P2", "P3", None]

    def test_resolution_is_idempotent(self, corpus_path):
        """Resolving twice changes nothing."""
        once = resolve_citations(load_corpus(corpus_path))
        assert resolve_citations(once) == once

    def test_existing_resolved_id_is_kept(self):
        """A preset resolved id is never cleared."""
        record = _paper(
            "A", "T", citations=[{"context": "c", "cited_title": "Nowhere", "resolved_id": "Z"}]
        )
        assert resolve_citations([record])[0].citations[0].resolved_id == "Z"

    def test_resolve_requires_unique_ids(self):
        """Duplicate ids make resolution fail."""
        with pytest.raises(DuplicateCorpusIdError):
            resolve_citations([_paper("A", "T1"), _paper("A", "T2")])

    def test_report_counts(self, corpus_path):
        """The fixture report counts resolved and empty sections."""
        report = validate_corpus(load_corpus(corpus_path))
        assert report.ok
        assert report.record_count == 3
        assert report.resolved_citations == 3
        assert report.unresolved_citations == 1
        assert report.empty_abstracts == 1
        assert report.empty_introductions == 1

    def test_report_duplicates_and_dangling(self):
        """Duplicate and dangling ids are reported, not raised."""
        records = [
            _paper("A", "T1"),
            _paper("A", "T2"),
            _paper("B", "T3", citations=[{"context": "c", "cited_title": "x", "resolved_id": "Q"}]),
        ]
        report = validate_corpus(records)
        assert report.duplicate_ids == ["A"]
        assert report.dangling_ids == ["Q"]
        assert not report.ok

    def test_shared_title_resolves_to_first_record(self):
        """With two records sharing a title, the first wins."""
        records = [
            _paper("A", "Same Title"),
            _paper("B", "Same title."),
            _paper("C", "Other", citations=[{"context": "c", "cited_title": "SAME TITLE"}]),
        ]
        report = validate_corpus(records)
        assert report.records[2].citations[0].resolved_id == "A"
