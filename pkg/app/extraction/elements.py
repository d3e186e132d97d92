"""
Paper Element Extraction

Prompt pipelines over one paper: text elements from the abstract and
introduction, result screening, main-table selection, (dataset, metric,
result) triples and the innovation summary.
"""

from collections.abc import Callable
from typing import Any, TypeVar

from app.core.exceptions import MissingElementsError, NoTablesError, TableIndexError
from app.corpus.models import PaperRecord
from app.extraction.models import ExtractedElements
from app.extraction.parsing import (
    parse_result_triples,
    parse_screening,
    parse_sentence,
    parse_table_choice,
    parse_text_elements,
)
from app.reasoning.llm import CompletionRequest, CompletionResult, LLMGateway
from app.reasoning.prompts import (
    INNOVATION,
    PAPER_SCREENING,
    TABLE_EXTRACTION,
    TABLE_SCREENING,
    TEXT_ELEMENTS,
)
from app.reasoning.structured import complete_structured

T = TypeVar("T")

Trace = list[CompletionResult]


def result_surface(dataset: str, metric: str, result: str) -> str:
    """Surface text of a Result entity."""
    return f"{metric} on {dataset}: {result}"


class ElementExtractor:
    """
    Runs the element prompts for one paper at a time.

    Every method takes an optional ``trace`` list that receives the
    completions it made, first prompt first.
    """

    def __init__(self, gateway: LLMGateway, max_reasks: int = 2, keywords_max: int = 5):
        self.gateway = gateway
        self.max_reasks = max_reasks
        self.keywords_max = keywords_max

    async def _structured(
        self,
        template_id: str,
        slots: dict[str, Any],
        parser: Callable[[str], T],
        trace: Trace | None,
    ) -> T:
        result = await complete_structured(
            self.gateway, CompletionRequest(template_id, slots), parser, self.max_reasks
        )
        if trace is not None:
            trace.extend(result.completions)
        return result.value

    @staticmethod
    def _paper_slots(record: PaperRecord) -> dict[str, str]:
        return {
            "title": record.title,
            "abstract": record.abstract,
            "introduction": record.introduction,
        }

    async def extract_text_elements(
        self, record: PaperRecord, trace: Trace | None = None
    ) -> ExtractedElements:
        """
        Field, keywords, problem, method, model and task from one completion.

        A record with empty abstract and introduction gets empty elements
        without a completion.

        Raises:
            UnparseableOutputError: After the bounded re-asks
        """
        if not record.abstract.strip() and not record.introduction.strip():
            return ExtractedElements()
        return await self._structured(
            TEXT_ELEMENTS,
            self._paper_slots(record),
            lambda text: parse_text_elements(text, self.keywords_max),
            trace,
        )

    async def screen_paper_for_results(
        self, record: PaperRecord, trace: Trace | None = None
    ) -> str | None:
        """The proposed model's name, or None when the paper proposes none."""
        return await self._structured(
            PAPER_SCREENING, self._paper_slots(record), parse_screening, trace
        )

    async def screen_tables(
        self, record: PaperRecord, model: str, trace: Trace | None = None
    ) -> int:
        """
        Index of the main results table.

        Raises:
            NoTablesError: Record has no tables (no completion is made)
            TableIndexError: The answer names a table the record lacks
            UnparseableOutputError: After the bounded re-asks
        """
        if not record.tables:
            raise NoTablesError(
                f"Paper {record.corpus_id} has no tables", details={"corpus_id": record.corpus_id}
            )
        indexes = record.table_indexes
        tables = "\n\n".join(table.render() for table in record.tables)
        return await self._structured(
            TABLE_SCREENING,
            {"title": record.title, "model": model, "tables": tables},
            lambda text: parse_table_choice(text, indexes),
            trace,
        )

    async def extract_table_triples(
        self,
        record: PaperRecord,
        table_index: int,
        model: str = "",
        trace: Trace | None = None,
    ) -> list[tuple[str, str, str]]:
        """
        (dataset, metric, result) rows of one table.

        Raises:
            TableIndexError: If the record has no table with that index
        """
        table = record.table(table_index)
        if table is None:
            raise TableIndexError(
                f"Table {table_index} is not in the record (tables: {record.table_indexes})",
                details={"table_index": table_index, "available": record.table_indexes},
            )
        return await self._structured(
            TABLE_EXTRACTION,
            {"title": record.title, "model": model, "table": table.render()},
            parse_result_triples,
            trace,
        )

    async def summarize_innovation(
        self, record: PaperRecord, elements: ExtractedElements, trace: Trace | None = None
    ) -> str:
        """
        One-sentence innovation summary from problem, task, method and results.

        Raises:
            MissingElementsError: If problem and method are both absent
        """
        if not elements.problem and not elements.method:
            raise MissingElementsError(
                f"Paper {record.corpus_id} has neither problem nor method",
                details={"corpus_id": record.corpus_id},
            )
        results = "; ".join(result_surface(*item) for item in elements.results)
        return await self._structured(
            INNOVATION,
            {
                "problem": elements.problem or "",
                "task": elements.task or "",
                "method": elements.method or "",
                "results": results,
            },
            parse_sentence,
            trace,
        )
