"""Corpus module initialization."""

from app.corpus.models import AuthorRecord, CitationContext, PaperRecord, TableBlock
from app.corpus.parser import (
    corpus_hash,
    load_corpus,
    parse_paper_record,
    serialize_paper_record,
    write_corpus,
)
from app.corpus.validation import CorpusReport, resolve_citations, validate_corpus

__all__ = [
    "AuthorRecord",
    "CitationContext",
    "PaperRecord",
    "TableBlock",
    "corpus_hash",
    "load_corpus",
    "parse_paper_record",
    "serialize_paper_record",
    "write_corpus",
    "CorpusReport",
    "resolve_citations",
    "validate_corpus",
]
