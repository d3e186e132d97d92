"""
Completion parsers.

Each parser raises ValueError on text it cannot read, which makes the
structured-completion loop re-ask; errors that a re-ask cannot fix (a table
number outside the record) raise the domain error directly.
"""

import ast
import json
import re
from typing import Any

from app.core.exceptions import TableIndexError
from app.extraction.models import CitationRelation, ExtractedElements

ELEMENT_KEYS = ("Field", "Keywords", "Problem", "Method", "Model", "Task")

_FENCE_RE = re.compile(r"```(?:json|python)?", re.IGNORECASE)
_MODEL_RE = re.compile(r"^\s*model\s*:\s*(.+?)\s*$", re.IGNORECASE | re.MULTILINE)
_TABLE_RE = re.compile(r"main\s+results\s+table\s*:\s*table\s*(\d+)", re.IGNORECASE)
_TRIPLE_LINE_RE = re.compile(r"^\s*[-*]?\s*\((.+)\)\s*[.,;]?\s*$")
_LABEL_RE = re.compile(
    r"label\s*:\s*(direct[\s_-]*use|task[\s_-]*related|unrelated)", re.IGNORECASE
)
_CANONICAL_RE = re.compile(r"^\s*canonical\s*:\s*(.+?)\s*$", re.IGNORECASE | re.MULTILINE)
_VALUE_PREFIX_RE = re.compile(r"^(?:value|innovation|answer)\s*:\s*", re.IGNORECASE)
_QUOTES = "\"'`“”‘’"


def _strip_quotes(value: str) -> str:
    value = value.strip()
    while len(value) >= 2 and value[0] in _QUOTES and value[-1] in _QUOTES:
        value = value[1:-1].strip()
    return value


def _first_line(text: str) -> str:
    for line in text.splitlines():
        if line.strip():
            return line.strip()
    return ""


def _is_no(text: str) -> bool:
    return text.strip().casefold().strip(" .!\"'") == "no"


# =============================================================================
# TEXT ELEMENTS
# =============================================================================


def _object_span(text: str) -> str:
    cleaned = _FENCE_RE.sub("", text)
    start, end = cleaned.find("{"), cleaned.rfind("}")
    if start < 0 or end <= start:
        raise ValueError("no {...} object found in the answer")
    return cleaned[start : end + 1]


def _load_object(span: str) -> dict[str, Any]:
    try:
        value = json.loads(span)
    except json.JSONDecodeError:
        try:
            value = ast.literal_eval(span)
        except (ValueError, SyntaxError) as e:
            raise ValueError(f"object is neither JSON nor a literal dict: {e}") from e
    if not isinstance(value, dict):
        raise ValueError("answer object is not a mapping")
    return value


def _optional_text(key: str, value: Any) -> str | None:
    if value is None:
        return None
    if isinstance(value, list):
        value = ", ".join(str(item) for item in value)
    if not isinstance(value, str | int | float):
        raise ValueError(f"value of {key} is not text")
    text = _strip_quotes(str(value))
    return text or None


def _keywords(value: Any, limit: int) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        items: list[Any] = value.split(",") if value.strip() else []
    elif isinstance(value, list | tuple):
        items = list(value)
    else:
        raise ValueError("Keywords is neither a list nor a string")
    keywords: list[str] = []
    for item in items:
        text = _strip_quotes(str(item))
        if text and text not in keywords:
            keywords.append(text)
    return keywords[:limit]


def parse_text_elements(text: str, keywords_max: int = 5) -> ExtractedElements:
    """
    Read the keyed element object, tolerating prose and code fences around it.

    Key names must be exactly Field, Keywords, Problem, Method, Model, Task.
    """
    data = _load_object(_object_span(text))
    unknown = sorted(set(data) - set(ELEMENT_KEYS))
    if unknown:
        raise ValueError(f"unexpected keys {unknown}; use exactly {list(ELEMENT_KEYS)}")
    missing = [key for key in ELEMENT_KEYS if key not in data]
    if missing:
        raise ValueError(f"missing keys {missing}")
    return ExtractedElements(
        field=_optional_text("Field", data["Field"]),
        keywords=_keywords(data["Keywords"], keywords_max),
        problem=_optional_text("Problem", data["Problem"]),
        method=_optional_text("Method", data["Method"]),
        model=_optional_text("Model", data["Model"]),
        task=_optional_text("Task", data["Task"]),
    )


# =============================================================================
# SCREENING AND TABLES
# =============================================================================


def parse_screening(text: str) -> str | None:
    """Model name, or None for a NO (or empty) answer."""
    if not text.strip() or _is_no(text):
        return None
    match = _MODEL_RE.search(text)
    name = _strip_quotes(match.group(1) if match else _first_line(text))
    if not name or _is_no(name):
        return None
    return name


def parse_table_choice(text: str, table_indexes: list[int]) -> int:
    match = _TABLE_RE.search(text)
    if match is None:
        raise ValueError("expected 'Main Results Table: Table <number>'")
    index = int(match.group(1))
    if index not in table_indexes:
        raise TableIndexError(
            f"Table {index} is not in the record (tables: {table_indexes})",
            details={"table_index": index, "available": table_indexes},
        )
    return index


def parse_result_triples(text: str) -> list[tuple[str, str, str]]:
    """
    Read ``(dataset, metric, result)`` lines in order, dropping duplicates.

    The result component may itself contain commas.
    """
    triples: list[tuple[str, str, str]] = []
    seen_line = False
    for line in text.splitlines():
        if not line.strip():
            continue
        match = _TRIPLE_LINE_RE.match(line)
        if match is None:
            continue
        seen_line = True
        parts = [_strip_quotes(part) for part in match.group(1).split(",", 2)]
        if len(parts) != 3 or not all(parts):
            raise ValueError(f"line {line.strip()!r} is not (dataset, metric, result)")
        triple = (parts[0], parts[1], parts[2])
        if triple not in triples:
            triples.append(triple)
    if not seen_line and text.strip() and text.strip().casefold() != "none":
        raise ValueError("no '(dataset, metric, result)' lines found")
    return triples


# =============================================================================
# FREE TEXT ANSWERS
# =============================================================================


def parse_sentence(text: str) -> str:
    """First non-empty line with any answer prefix and quotes removed."""
    line = _strip_quotes(_VALUE_PREFIX_RE.sub("", _first_line(text)))
    if not line:
        raise ValueError("empty answer")
    return line


def parse_citation_label(text: str) -> CitationRelation:
    match = _LABEL_RE.search(text)
    if match is None:
        raise ValueError("expected 'Label: <direct use | task related | unrelated>'")
    key = re.sub(r"[\s_-]+", "", match.group(1).casefold())
    return {
        "directuse": CitationRelation.DIRECT_USE,
        "taskrelated": CitationRelation.TASK_RELATED,
    }.get(key, CitationRelation.UNRELATED)


def parse_canonical_choice(text: str, candidates: list[str]) -> str | None:
    """A candidate named by ``Canonical: <name>``; NONE or an unknown name gives None."""
    match = _CANONICAL_RE.search(text)
    if match is None:
        raise ValueError("expected 'Canonical: <name | NONE>'")
    name = _strip_quotes(match.group(1))
    return name if name in candidates else None
