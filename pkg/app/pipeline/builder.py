"""
Graph Build Pipeline

Corpus validation -> extraction -> curation -> store ingest ->
disambiguation. Each stage is timed into the run manifest and any failure
is raised as a StageError naming the stage.
"""

from collections.abc import Awaitable, Callable, Iterator
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TypeVar

from app.core.config import Settings
from app.core.exceptions import DuplicateCorpusIdError, KnowledgeGraphError, StageError
from app.core.manifest import RunManifest
from app.corpus import CorpusReport, PaperRecord, corpus_hash, validate_corpus
from app.curation import (
    CanonicalMap,
    CurationReport,
    Curator,
    DisambiguationParams,
    Disambiguator,
    KindDisambiguation,
    load_maps,
)
from app.embedding import EmbeddingProvider
from app.extraction import ExtractionPipeline, ExtractionResult
from app.graph.models import IngestReport
from app.graph.store import GraphStore
from app.ontology import EntityKind
from app.reasoning.llm import LLMGateway
from app.utils import get_logger

logger = get_logger(__name__)

T = TypeVar("T")

STAGE_INGEST = "ingest"
STAGE_EXTRACT = "extract"
STAGE_CLEAN = "clean"
STAGE_LOAD = "load"
STAGE_DISAMBIGUATE = "disambiguate"


@dataclass
class BuildResult:
    store: GraphStore
    corpus: CorpusReport | None = None
    extraction: ExtractionResult | None = None
    curated: ExtractionResult | None = None
    curation: CurationReport | None = None
    ingest: IngestReport | None = None
    disambiguation: dict[EntityKind, tuple[CanonicalMap, KindDisambiguation]] = field(
        default_factory=dict
    )

    def summary(self) -> dict[str, Any]:
        return {
            "corpus": self.corpus.to_dict() if self.corpus else None,
            "extraction_failures": len(self.extraction.failures) if self.extraction else 0,
            "curation": self.curation.to_dict() if self.curation else None,
            "ingest": self.ingest.to_dict() if self.ingest else None,
            "disambiguation": [outcome.to_dict() for _, outcome in self.disambiguation.values()],
            "stats": self.store.stats().to_dict(),
        }


class GraphBuilder:
    """Runs the construction stages over one corpus."""

    def __init__(
        self,
        settings: Settings,
        gateway: LLMGateway,
        embedder: EmbeddingProvider,
        manifest: RunManifest | None = None,
    ) -> None:
        self.settings = settings
        self.gateway = gateway
        self.embedder = embedder
        self.manifest = manifest
        self.pipeline = ExtractionPipeline.from_settings(settings, gateway)
        self.curator = Curator(gateway, max_reasks=settings.EXTRACTION_MAX_REASKS)
        self.disambiguator = Disambiguator(
            embedder, DisambiguationParams.from_settings(settings), gateway
        )

    @contextmanager
    def _stage(self, name: str) -> Iterator[None]:
        timer = self.manifest.stage(name) if self.manifest else nullcontext()
        try:
            with timer:
                yield
        except StageError:
            raise
        except KnowledgeGraphError as e:
            logger.error("build_stage_failed", stage=name, code=e.code, error=e.message)
            raise StageError(name, e) from e

    async def _run(self, name: str, step: Callable[[], Awaitable[T]]) -> T:
        with self._stage(name):
            return await step()

    # =========================================================================
    # STAGES
    # =========================================================================

    def validate(self, records: list[PaperRecord]) -> CorpusReport:
        with self._stage(STAGE_INGEST):
            report = validate_corpus(records)
            if report.duplicate_ids:
                raise DuplicateCorpusIdError(
                    "Corpus ids must be unique", details={"duplicates": report.duplicate_ids}
                )
            return report

    async def extract(self, records: list[PaperRecord]) -> ExtractionResult:
        return await self._run(STAGE_EXTRACT, lambda: self.pipeline.extract_corpus(records))

    async def clean(self, result: ExtractionResult) -> tuple[ExtractionResult, CurationReport]:
        return await self._run(STAGE_CLEAN, lambda: self.curator.curate(result))

    def load(self, result: ExtractionResult, store: GraphStore) -> IngestReport:
        with self._stage(STAGE_LOAD):
            return store.ingest(result)

    async def disambiguate(
        self, store: GraphStore, overrides_dir: str | Path | None = None
    ) -> dict[EntityKind, tuple[CanonicalMap, KindDisambiguation]]:
        overrides = load_maps(overrides_dir) if overrides_dir else None
        return await self._run(
            STAGE_DISAMBIGUATE, lambda: self.disambiguator.disambiguate(store, overrides)
        )

    # =========================================================================
    # FULL BUILD
    # =========================================================================

    async def build(
        self, records: list[PaperRecord], overrides_dir: str | Path | None = None
    ) -> BuildResult:
        """Every stage in order; the returned store is still writable."""
        corpus = self.validate(records)
        store = GraphStore(corpus_hash(corpus.records), self.settings.PIPELINE_VERSION)
        result = BuildResult(store, corpus)
        result.extraction = await self.extract(corpus.records)
        result.curated, result.curation = await self.clean(result.extraction)
        result.ingest = self.load(result.curated, store)
        result.disambiguation = await self.disambiguate(store, overrides_dir)
        store.check_integrity()
        logger.info("graph_built", entities=len(store), triples=store.triple_count)
        return result
