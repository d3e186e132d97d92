"""
Extraction Pipeline

Turns papers into entity and triple candidates: metadata without any
completion, prompt-extracted elements, table results, the innovation
summary and classified citations. A failing stage is recorded and the
remaining stages still run.
"""

import asyncio
from collections.abc import Iterable, Mapping

from app.core.config import Settings
from app.core.exceptions import KnowledgeGraphError
from app.corpus.models import PaperRecord
from app.extraction.citations import CitationClassifier, CueLexiconClassifier, build_classifier
from app.extraction.elements import ElementExtractor, Trace, result_surface
from app.extraction.models import (
    EntityRef,
    ExtractionResult,
    PaperExtraction,
    PromptRecord,
    StageFailure,
)
from app.ontology import EntityKind, RelationKind
from app.reasoning.llm import LLMGateway
from app.utils import get_logger

logger = get_logger(__name__)

# =============================================================================
# STAGES
# =============================================================================

STAGE_METADATA = "metadata"
STAGE_TEXT = "text_elements"
STAGE_SCREENING = "paper_screening"
STAGE_TABLE_SCREENING = "table_screening"
STAGE_TABLE_EXTRACTION = "table_extraction"
STAGE_INNOVATION = "innovation"
STAGE_CITATIONS = "citations"

K = EntityKind
R = RelationKind


class ExtractionPipeline:
    """Per-paper extraction, fanned out over a corpus."""

    def __init__(
        self,
        gateway: LLMGateway,
        classifier: CitationClassifier | None = None,
        *,
        max_reasks: int = 2,
        keywords_max: int = 5,
        element_links: bool = False,
    ) -> None:
        self.gateway = gateway
        self.elements = ElementExtractor(gateway, max_reasks, keywords_max)
        self.classifier = classifier or CueLexiconClassifier()
        self.element_links = element_links

    @classmethod
    def from_settings(cls, settings: Settings, gateway: LLMGateway) -> "ExtractionPipeline":
        return cls(
            gateway,
            build_classifier(settings, gateway),
            max_reasks=settings.EXTRACTION_MAX_REASKS,
            keywords_max=settings.KEYWORDS_MAX,
            element_links=settings.EXTRACTION_ELEMENT_LINKS,
        )

    # =========================================================================
    # STAGES
    # =========================================================================

    @staticmethod
    def extract_metadata(record: PaperRecord, paper: PaperExtraction) -> EntityRef:
        """Title, authors, institutions, venue and date; no completions."""
        title = paper.add_entity(K.TITLE, record.title, STAGE_METADATA)
        for author in record.authors:
            person = paper.add_entity(K.AUTHOR, author.name, STAGE_METADATA)
            paper.add_triple(person, R.WRITES, title, STAGE_METADATA)
            if author.institution:
                institution = paper.add_entity(K.INSTITUTION, author.institution, STAGE_METADATA)
                paper.add_triple(person, R.WORKS_FOR, institution, STAGE_METADATA)
        if record.venue and record.venue.strip():
            venue = paper.add_entity(K.CONFERENCE, record.venue.strip(), STAGE_METADATA)
            paper.add_triple(title, R.PUBLISHES, venue, STAGE_METADATA)
        if record.date and record.date.strip():
            date = paper.add_entity(K.DATE, record.date.strip(), STAGE_METADATA)
            paper.add_triple(title, R.IS_WRITTEN_IN, date, STAGE_METADATA)
        return title

    @staticmethod
    def _fail(paper: PaperExtraction, stage: str, error: KnowledgeGraphError) -> None:
        paper.failures.append(StageFailure(paper.corpus_id, stage, error.code, error.message))
        logger.warning(
            "extraction_stage_failed",
            corpus_id=paper.corpus_id,
            stage=stage,
            code=error.code,
            error=error.message,
        )

    @staticmethod
    def _keep_prompts(paper: PaperExtraction, stage: str, trace: Trace) -> str | None:
        """Record the stage's first prompt; returns its digest."""
        if not trace:
            return None
        first = trace[0]
        paper.prompts.append(
            PromptRecord(
                paper.corpus_id, stage, first.template_id, first.prompt_digest, first.prompt
            )
        )
        return first.prompt_digest

    async def _run_tables(
        self, record: PaperRecord, paper: PaperExtraction
    ) -> tuple[str | None, str | None]:
        """Screening, table choice and table triples; returns (screened model, table digest)."""
        trace: Trace = []
        try:
            model = await self.elements.screen_paper_for_results(record, trace)
        except KnowledgeGraphError as e:
            self._fail(paper, STAGE_SCREENING, e)
            return None, None
        finally:
            self._keep_prompts(paper, STAGE_SCREENING, trace)
        if model is None:
            return None, None

        trace = []
        try:
            table_index = await self.elements.screen_tables(record, model, trace)
        except KnowledgeGraphError as e:
            self._fail(paper, STAGE_TABLE_SCREENING, e)
            return model, None
        finally:
            self._keep_prompts(paper, STAGE_TABLE_SCREENING, trace)

        trace = []
        digest = None
        try:
            paper.elements.results = await self.elements.extract_table_triples(
                record, table_index, model, trace
            )
        except KnowledgeGraphError as e:
            self._fail(paper, STAGE_TABLE_EXTRACTION, e)
        finally:
            digest = self._keep_prompts(paper, STAGE_TABLE_EXTRACTION, trace)
        return model, digest

    async def _run_citations(
        self,
        record: PaperRecord,
        paper: PaperExtraction,
        title: EntityRef,
        titles: Mapping[str, str],
    ) -> None:
        for citation in record.citations:
            cited = citation.resolved_id
            if cited is None or cited == record.corpus_id or cited not in titles:
                continue
            if titles[cited] == record.title:
                continue
            try:
                label = await self.classifier.classify(citation)
            except KnowledgeGraphError as e:
                self._fail(paper, STAGE_CITATIONS, e)
                continue
            relation = label.label.relation
            if relation is None:
                continue
            # The cited title is an endpoint only; its own paper supplies the entity.
            paper.add_triple(title, relation, EntityRef(K.TITLE, titles[cited]), STAGE_CITATIONS)

    # =========================================================================
    # PER PAPER
    # =========================================================================

    async def extract_all(
        self, record: PaperRecord, titles: Mapping[str, str] | None = None
    ) -> PaperExtraction:
        """
        Every candidate of one paper.

        Args:
            record: Paper with citations already resolved
            titles: corpus_id -> title for the whole corpus; citations whose
                resolved id is missing here produce nothing
        """
        titles = titles if titles is not None else {record.corpus_id: record.title}
        paper = PaperExtraction(record.corpus_id)
        title = self.extract_metadata(record, paper)
        elements = paper.elements

        trace: Trace = []
        text_digest = None
        try:
            extracted = await self.elements.extract_text_elements(record, trace)
            paper.elements = elements = extracted
        except KnowledgeGraphError as e:
            self._fail(paper, STAGE_TEXT, e)
        finally:
            text_digest = self._keep_prompts(paper, STAGE_TEXT, trace)

        screened_model, result_digest = None, None
        if record.tables:
            screened_model, result_digest = await self._run_tables(record, paper)
        if elements.model is None and screened_model:
            elements.model = screened_model

        innovation_digest = None
        if elements.problem or elements.method:
            trace = []
            try:
                elements.innovation = await self.elements.summarize_innovation(
                    record, elements, trace
                )
            except KnowledgeGraphError as e:
                self._fail(paper, STAGE_INNOVATION, e)
            finally:
                innovation_digest = self._keep_prompts(paper, STAGE_INNOVATION, trace)

        self._emit_elements(paper, title, text_digest, result_digest, innovation_digest)
        await self._run_citations(record, paper, title, titles)
        logger.debug(
            "paper_extracted",
            corpus_id=record.corpus_id,
            entities=len(paper.entities),
            triples=len(paper.triples),
            inter_paper=len(paper.inter_paper),
            failures=len(paper.failures),
        )
        return paper

    def _emit_elements(
        self,
        paper: PaperExtraction,
        title: EntityRef,
        text_digest: str | None,
        result_digest: str | None,
        innovation_digest: str | None,
    ) -> None:
        elements = paper.elements

        def element(
            kind: EntityKind, surface: str | None, relation: RelationKind, digest: str | None
        ) -> EntityRef | None:
            if not surface:
                return None
            ref = paper.add_entity(kind, surface, STAGE_TEXT, digest)
            paper.add_triple(title, relation, ref, STAGE_TEXT)
            return ref

        element(K.FIELD, elements.field, R.BELONGS_TO, text_digest)
        for keyword in elements.keywords:
            element(K.KEYWORDS, keyword, R.KEYWORDS, text_digest)
        problem = element(K.PROBLEM, elements.problem, R.SOLVES, text_digest)
        method = element(K.METHOD, elements.method, R.ADOPTS, text_digest)
        model = element(K.MODEL, elements.model, R.PROPOSES, text_digest)
        task = element(K.TASK, elements.task, R.WORKS_ON, text_digest)
        innovation = element(K.INNOVATION, elements.innovation, R.INNOVATES, innovation_digest)

        results: list[tuple[EntityRef, EntityRef, EntityRef]] = []
        for dataset_name, metric_name, value in elements.results:
            stage = STAGE_TABLE_EXTRACTION
            dataset = paper.add_entity(K.DATASET, dataset_name, stage, result_digest)
            metric = paper.add_entity(K.METRIC, metric_name, stage, result_digest)
            result = paper.add_entity(
                K.RESULT,
                result_surface(dataset_name, metric_name, value),
                STAGE_TABLE_EXTRACTION,
                result_digest,
            )
            paper.add_triple(title, R.EXPERIMENTS_ON, dataset, STAGE_TABLE_EXTRACTION)
            paper.add_triple(title, R.USES, metric, STAGE_TABLE_EXTRACTION)
            paper.add_triple(title, R.ACHIEVES, result, STAGE_TABLE_EXTRACTION)
            results.append((dataset, metric, result))

        if not self.element_links:
            return
        links: list[tuple[EntityRef | None, RelationKind, EntityRef | None]] = [
            (method, R.SOLVES, problem),
            (model, R.SOLVES, problem),
            (method, R.PROPOSES, model),
            (model, R.WORKS_ON, task),
            (task, R.FACES, problem),
            (method, R.INNOVATES, innovation),
        ]
        for dataset, metric, result in results:
            links += [
                (model, R.EXPERIMENTS_ON, dataset),
                (model, R.USES, metric),
                (model, R.ACHIEVES, result),
            ]
        for subject, relation, obj in links:
            if subject is not None and obj is not None:
                paper.add_triple(subject, relation, obj, "element_links")

    # =========================================================================
    # CORPUS
    # =========================================================================

    async def extract_corpus(self, records: Iterable[PaperRecord]) -> ExtractionResult:
        """Extract every paper concurrently; results keep corpus order."""
        records = list(records)
        titles = {record.corpus_id: record.title for record in records}
        papers = await asyncio.gather(*(self.extract_all(r, titles) for r in records))
        result = ExtractionResult(list(papers))
        logger.info(
            "corpus_extracted",
            papers=len(records),
            entities=len(result.entities),
            triples=len(result.triples),
            inter_paper=len(result.inter_paper),
            failures=len(result.failures),
            completions=len(self.gateway.ledger),
        )
        return result

    async def link_corpus(self, records: Iterable[PaperRecord]) -> ExtractionResult:
        """Metadata and classified citations only; no element completions."""
        records = list(records)
        titles = {record.corpus_id: record.title for record in records}

        async def link(record: PaperRecord) -> PaperExtraction:
            paper = PaperExtraction(record.corpus_id)
            title = self.extract_metadata(record, paper)
            await self._run_citations(record, paper, title, titles)
            return paper

        papers = await asyncio.gather(*(link(r) for r in records))
        result = ExtractionResult(list(papers))
        logger.info("citations_linked", papers=len(records), inter_paper=len(result.inter_paper))
        return result


def run_extraction(
    records: Iterable[PaperRecord], pipeline: ExtractionPipeline
) -> ExtractionResult:
    """Synchronous entry point for the CLI."""
    return asyncio.run(pipeline.extract_corpus(records))
