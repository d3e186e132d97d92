"""
Corpus line parsing and serialization.

One JSON object per line with the keys corpus_id, title, authors, venue,
date, abstract, introduction, tables and citations.
"""

import json
from collections.abc import Iterable
from pathlib import Path

from pydantic import ValidationError

from app.core.exceptions import CorpusIOError, CorpusParseError, MissingFieldError
from app.corpus.models import PaperRecord
from app.utils import get_logger, iter_lines, sha256_hex

logger = get_logger(__name__)

REQUIRED_FIELDS = ("corpus_id", "title")


def parse_paper_record(document: str, line_number: int | None = None) -> PaperRecord:
    """
    Parse one corpus line.

    Raises:
        CorpusParseError: Malformed JSON or invalid field values
        MissingFieldError: No corpus_id or title
    """
    where = {"line": line_number} if line_number is not None else {}
    try:
        payload = json.loads(document)
    except json.JSONDecodeError as e:
        raise CorpusParseError(f"Malformed corpus record: {e.msg}", details=where) from e
    if not isinstance(payload, dict):
        raise CorpusParseError("Corpus record must be an object", details=where)

    for field in REQUIRED_FIELDS:
        value = payload.get(field)
        if value is None or (isinstance(value, str) and not value.strip()):
            raise MissingFieldError(
                f"Corpus record is missing required field '{field}'",
                details={**where, "field": field},
            )

    try:
        return PaperRecord.model_validate(payload)
    except ValidationError as e:
        raise CorpusParseError(
            f"Invalid corpus record {payload.get('corpus_id')!r}",
            details={**where, "errors": e.errors(include_url=False, include_context=False)},
        ) from e


def serialize_paper_record(record: PaperRecord) -> str:
    """Serialize with the wire field names; parse(serialize(r)) == r."""
    data = record.model_dump(by_alias=True, exclude_none=True)
    return json.dumps(data, ensure_ascii=False, sort_keys=True)


def load_corpus(path: str | Path) -> list[PaperRecord]:
    """Parse every non-blank line of a corpus file, in order."""
    try:
        records = [parse_paper_record(line, number) for number, line in iter_lines(path)]
    except OSError as e:
        raise CorpusIOError(f"Cannot read corpus {path}: {e}", details={"path": str(path)}) from e
    logger.info("corpus_loaded", path=str(path), records=len(records))
    return records


def write_corpus(path: str | Path, records: Iterable[PaperRecord]) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(serialize_paper_record(record) + "\n")


def corpus_hash(records: Iterable[PaperRecord]) -> str:
    """Digest of the serialized corpus, recorded in snapshots."""
    return sha256_hex("\n".join(serialize_paper_record(r) for r in records))
