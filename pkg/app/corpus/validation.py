"""Corpus validation and citation resolution."""

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any

from app.core.exceptions import DuplicateCorpusIdError
from app.corpus.models import PaperRecord
from app.utils import get_logger, normalize_surface

logger = get_logger(__name__)


@dataclass
class CorpusReport:
    """Problems found in a corpus; nothing here is raised."""

    records: list[PaperRecord] = field(default_factory=list)
    duplicate_ids: list[str] = field(default_factory=list)
    dangling_ids: list[str] = field(default_factory=list)
    resolved_citations: int = 0
    unresolved_citations: int = 0
    empty_abstracts: int = 0
    empty_introductions: int = 0

    @property
    def record_count(self) -> int:
        return len(self.records)

    @property
    def ok(self) -> bool:
        return not self.duplicate_ids and not self.dangling_ids

    def to_dict(self) -> dict[str, Any]:
        return {
            "records": self.record_count,
            "duplicate_ids": self.duplicate_ids,
            "dangling_ids": self.dangling_ids,
            "resolved_citations": self.resolved_citations,
            "unresolved_citations": self.unresolved_citations,
            "empty_abstracts": self.empty_abstracts,
            "empty_introductions": self.empty_introductions,
        }


def _title_index(records: list[PaperRecord]) -> dict[str, str]:
    """Normalized title -> corpus_id; the first record wins on a shared title."""
    index: dict[str, str] = {}
    for record in records:
        index.setdefault(normalize_surface(record.title), record.corpus_id)
    return index


def _resolve(records: list[PaperRecord], index: dict[str, str]) -> list[PaperRecord]:
    resolved: list[PaperRecord] = []
    for record in records:
        citations = []
        changed = False
        for citation in record.citations:
            if citation.resolved_id is None:
                target = index.get(normalize_surface(citation.cited_title))
                if target is not None:
                    citation = citation.model_copy(update={"resolved_id": target})
                    changed = True
            citations.append(citation)
        resolved.append(record.model_copy(update={"citations": citations}) if changed else record)
    return resolved


def resolve_citations(records: Iterable[PaperRecord]) -> list[PaperRecord]:
    """
    Fill resolved_id where a cited title matches a record title after normalization.

    Idempotent; a previously set resolved_id is never cleared.

    Raises:
        DuplicateCorpusIdError: If corpus ids are not unique
    """
    items = list(records)
    duplicates = _duplicates(items)
    if duplicates:
        raise DuplicateCorpusIdError(
            "Citation resolution requires unique corpus ids", details={"duplicates": duplicates}
        )
    return _resolve(items, _title_index(items))


def _duplicates(records: list[PaperRecord]) -> list[str]:
    counts = Counter(record.corpus_id for record in records)
    seen: list[str] = []
    for record in records:
        if counts[record.corpus_id] > 1 and record.corpus_id not in seen:
            seen.append(record.corpus_id)
    return seen


def validate_corpus(records: Iterable[PaperRecord]) -> CorpusReport:
    """
    Validate a record stream, resolving citations along the way.

    Records keep stream order. With duplicate ids present, the first record
    carrying a title is the resolution target.
    """
    items = list(records)
    report = CorpusReport(duplicate_ids=_duplicates(items))
    report.records = _resolve(items, _title_index(items))

    known_ids = {record.corpus_id for record in items}
    for record in report.records:
        if not record.abstract.strip():
            report.empty_abstracts += 1
        if not record.introduction.strip():
            report.empty_introductions += 1
        for citation in record.citations:
            if citation.resolved_id is None:
                report.unresolved_citations += 1
            elif citation.resolved_id in known_ids:
                report.resolved_citations += 1
            else:
                report.unresolved_citations += 1
                if citation.resolved_id not in report.dangling_ids:
                    report.dangling_ids.append(citation.resolved_id)

    logger.info(
        "corpus_validated",
        records=report.record_count,
        duplicates=len(report.duplicate_ids),
        resolved=report.resolved_citations,
        unresolved=report.unresolved_citations,
    )
    return report
