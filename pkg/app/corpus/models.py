"""Corpus record models."""

import re
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

_YEAR_RE = re.compile(r"\b(1[89]\d{2}|2\d{3})\b")
_MONTHS = {
    name: number
    for number, names in enumerate(
        [
            ("january", "jan"),
            ("february", "feb"),
            ("march", "mar"),
            ("april", "apr"),
            ("may",),
            ("june", "jun"),
            ("july", "jul"),
            ("august", "aug"),
            ("september", "sep", "sept"),
            ("october", "oct"),
            ("november", "nov"),
            ("december", "dec"),
        ],
        start=1,
    )
    for name in names
}


class _RecordModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="ignore", frozen=True)


class AuthorRecord(_RecordModel):
    name: str = Field(..., min_length=1)
    institution: str | None = None

    @field_validator("name", "institution", mode="before")
    @classmethod
    def strip_text(cls, value: Any) -> Any:
        return value.strip() if isinstance(value, str) else value

    @field_validator("institution")
    @classmethod
    def blank_institution_is_absent(cls, value: str | None) -> str | None:
        return value or None


class TableBlock(_RecordModel):
    table_index: int = Field(..., alias="index", ge=0)
    caption: str = ""
    cells: list[list[str]] = Field(default_factory=list)

    @field_validator("cells", mode="before")
    @classmethod
    def stringify_cells(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [
                [
                    "" if cell is None else str(cell) for cell in row
                ]
                if isinstance(row, list)
                else row
                for row in value
            ]
        return value

    def render(self) -> str:
        """Caption plus tab-separated rows, as shown to the model."""
        rows = ["\t".join(row) for row in self.cells]
        return "\n".join([f"Table {self.table_index}: {self.caption}".rstrip(), *rows])


class CitationContext(_RecordModel):
    context_text: str = Field(..., alias="context", min_length=1)
    cited_title: str = Field(..., min_length=1)
    resolved_id: str | None = None

    @field_validator("context_text")
    @classmethod
    def context_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("citation context must be non-empty")
        return value


class PaperRecord(_RecordModel):
    """One structured paper keyed by its corpus id."""

    corpus_id: str = Field(..., min_length=1)
    title: str = Field(..., min_length=1)
    authors: list[AuthorRecord] = Field(default_factory=list)
    venue: str | None = None
    date: str | None = None
    abstract: str = ""
    introduction: str = ""
    tables: list[TableBlock] = Field(default_factory=list)
    citations: list[CitationContext] = Field(default_factory=list)

    @field_validator("corpus_id", "title", mode="before")
    @classmethod
    def strip_required(cls, value: Any) -> Any:
        return value.strip() if isinstance(value, str) else value

    @field_validator("authors", mode="before")
    @classmethod
    def accept_plain_author_names(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [{"name": item} if isinstance(item, str) else item for item in value]
        return value

    @field_validator("abstract", "introduction", mode="before")
    @classmethod
    def null_section_is_empty(cls, value: Any) -> Any:
        return "" if value is None else value

    @model_validator(mode="after")
    def unique_table_indexes(self) -> "PaperRecord":
        indexes = [table.table_index for table in self.tables]
        if len(indexes) != len(set(indexes)):
            raise ValueError(f"duplicate table index in {self.corpus_id}")
        return self

    @property
    def year(self) -> int | None:
        if not self.date:
            return None
        match = _YEAR_RE.search(self.date)
        return int(match.group(1)) if match else None

    @property
    def month(self) -> int | None:
        if not self.date:
            return None
        for token in re.findall(r"[A-Za-z]+", self.date):
            month = _MONTHS.get(token.casefold())
            if month:
                return month
        return None

    def table(self, table_index: int) -> TableBlock | None:
        return next((t for t in self.tables if t.table_index == table_index), None)

    @property
    def table_indexes(self) -> list[int]:
        return [table.table_index for table in self.tables]
