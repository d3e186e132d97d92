"""
QA datasets.

``jsonl`` (default): one object per line with item_id, question,
reference_answer and an optional paper_ids list. ``csv``: a header row with
the same columns; paper_ids are ``;``-separated.
"""

import csv
import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.core.exceptions import CorpusIOError, DatasetFormatError
from app.utils import get_logger, iter_lines

logger = get_logger(__name__)

DatasetFormat = Literal["jsonl", "csv"]


class QAItem(BaseModel):
    model_config = ConfigDict(frozen=True, str_strip_whitespace=True)

    item_id: str = Field(min_length=1)
    question: str = Field(min_length=1)
    reference_answer: str = Field(min_length=1)
    paper_ids: tuple[str, ...] = ()

    @field_validator("item_id", mode="before")
    @classmethod
    def _coerce_id(cls, value: Any) -> Any:
        return str(value) if isinstance(value, int) else value

    @field_validator("paper_ids", mode="before")
    @classmethod
    def _split_ids(cls, value: Any) -> Any:
        if value is None:
            return ()
        if isinstance(value, str):
            return tuple(part.strip() for part in value.split(";") if part.strip())
        return value


def _rows_jsonl(path: Path) -> list[tuple[int, Any]]:
    rows: list[tuple[int, Any]] = []
    for number, line in iter_lines(path):
        try:
            rows.append((number, json.loads(line)))
        except json.JSONDecodeError as e:
            rows.append((number, e))
    return rows


def _rows_csv(path: Path) -> list[tuple[int, Any]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        # Header is line 1.
        return [(number, dict(row)) for number, row in enumerate(reader, start=2)]


def load_qa_dataset(path: str | Path, format: DatasetFormat = "jsonl") -> list[QAItem]:
    """
    Load and validate every row.

    Raises:
        CorpusIOError: If the file cannot be read
        DatasetFormatError: Listing each malformed row with its line number
    """
    path = Path(path)
    try:
        rows = _rows_csv(path) if format == "csv" else _rows_jsonl(path)
    except OSError as e:
        raise CorpusIOError(f"Cannot read dataset {path}: {e}", details={"path": str(path)}) from e

    items: list[QAItem] = []
    problems: list[dict[str, Any]] = []
    seen: set[str] = set()
    for number, row in rows:
        if isinstance(row, Exception):
            problems.append({"line": number, "error": f"malformed JSON: {row}"})
            continue
        if not isinstance(row, dict):
            problems.append({"line": number, "error": "row must be an object"})
            continue
        try:
            item = QAItem.model_validate(row)
        except ValidationError as e:
            fields = sorted({str(err["loc"][0]) for err in e.errors() if err["loc"]})
            problems.append({"line": number, "error": f"invalid fields: {', '.join(fields)}"})
            continue
        if item.item_id in seen:
            problems.append({"line": number, "error": f"duplicate item_id {item.item_id!r}"})
            continue
        seen.add(item.item_id)
        items.append(item)

    if problems:
        raise DatasetFormatError(
            f"{len(problems)} malformed row(s) in {path.name}",
            details={"path": str(path), "rows": problems},
        )
    logger.info("dataset_loaded", path=str(path), items=len(items), format=format)
    return items

