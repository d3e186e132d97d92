"""
Candidate Curation

Runs detection and the repair policy over extraction candidates. Deleted
and unrepairable entities disappear together with their triples; repaired
entities take their new surface everywhere in their paper.
"""

import asyncio
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from app.core.exceptions import KnowledgeGraphError
from app.curation.detection import (
    Delete,
    ErrorDetector,
    ErrorLabel,
    Keep,
    Reextract,
    ReextractBundle,
    RuleErrorDetector,
    apply_repair_policy,
)
from app.extraction.models import (
    EntityCandidate,
    EntityRef,
    ExtractionResult,
    PaperExtraction,
)
from app.extraction.parsing import parse_sentence
from app.ontology.kinds import METADATA_KINDS
from app.reasoning.llm import CompletionRequest, LLMGateway
from app.reasoning.prompts import REEXTRACT
from app.reasoning.structured import complete_structured
from app.utils import get_logger

logger = get_logger(__name__)

STAGE_REEXTRACT = "reextract"


@dataclass(frozen=True)
class CurationRecord:
    corpus_id: str
    kind: str
    surface: str
    label: str
    action: str
    new_surface: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "corpus_id": self.corpus_id,
            "kind": self.kind,
            "surface": self.surface,
            "label": self.label,
            "action": self.action,
            "new_surface": self.new_surface,
        }


@dataclass
class CurationReport:
    judged: int = 0
    labels: Counter[str] = field(default_factory=Counter)
    deleted: int = 0
    repaired: int = 0
    dropped: int = 0
    records: list[CurationRecord] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "judged": self.judged,
            "labels": dict(sorted(self.labels.items())),
            "deleted": self.deleted,
            "repaired": self.repaired,
            "dropped": self.dropped,
            "records": [record.to_dict() for record in self.records],
        }


class Curator:
    """
    Applies detect -> policy -> repair to element candidates.

    Metadata entities come straight from the corpus and are never judged.
    A re-extracted value is checked once more; anything but Clean is dropped.
    """

    def __init__(
        self,
        gateway: LLMGateway | None = None,
        detector: ErrorDetector | None = None,
        max_reasks: int = 2,
    ) -> None:
        self.gateway = gateway
        self.detector = detector or RuleErrorDetector()
        self.max_reasks = max_reasks

    async def _reextract(self, bundle: ReextractBundle) -> str | None:
        if self.gateway is None or bundle.original_prompt is None:
            return None
        request = CompletionRequest(
            REEXTRACT,
            {
                "entity_kind": bundle.entity_kind.value,
                "entity_text": bundle.entity_text,
                "error_label": bundle.label.value,
                "original_prompt": bundle.original_prompt,
            },
        )
        try:
            result = await complete_structured(
                self.gateway, request, parse_sentence, self.max_reasks
            )
        except KnowledgeGraphError as e:
            logger.warning("reextract_failed", kind=bundle.entity_kind.value, code=e.code)
            return None
        return result.value

    async def _judge(
        self, paper: PaperExtraction, entity: EntityCandidate, report: CurationReport
    ) -> EntityRef | None:
        label = self.detector.detect(entity.surface, entity.kind)
        report.judged += 1
        report.labels[label.value] += 1
        decision = apply_repair_policy(entity, label, {p.prompt_digest: p for p in paper.prompts})

        def note(action: str, new_surface: str | None = None) -> None:
            report.records.append(
                CurationRecord(
                    paper.corpus_id,
                    entity.kind.value,
                    entity.surface,
                    label.value,
                    action,
                    new_surface,
                )
            )

        if isinstance(decision, Keep):
            return entity.ref
        if isinstance(decision, Delete):
            report.deleted += 1
            note("delete")
            return None
        assert isinstance(decision, Reextract)
        surface = await self._reextract(decision.bundle)
        if surface is not None and self.detector.detect(surface, entity.kind) is ErrorLabel.CLEAN:
            report.repaired += 1
            note("reextract", surface)
            return EntityRef(entity.kind, surface)
        report.dropped += 1
        note("drop")
        return None

    async def _curate_paper(
        self, paper: PaperExtraction, report: CurationReport
    ) -> PaperExtraction:
        judged = [e for e in paper.entities if e.kind not in METADATA_KINDS]
        outcomes = await asyncio.gather(*(self._judge(paper, e, report) for e in judged))
        mapping: dict[EntityRef, EntityRef | None] = {
            entity.ref: outcome for entity, outcome in zip(judged, outcomes, strict=True)
        }

        curated = PaperExtraction(paper.corpus_id, paper.elements)
        curated.failures = list(paper.failures)
        curated.prompts = list(paper.prompts)
        for entity in paper.entities:
            ref = mapping.get(entity.ref, entity.ref)
            if ref is None:
                continue
            stage = entity.stage if ref == entity.ref else STAGE_REEXTRACT
            curated.add_entity(ref.kind, ref.surface, stage, entity.prompt_digest)
        for triple in [*paper.triples, *paper.inter_paper]:
            subject = mapping.get(triple.subject, triple.subject)
            obj = mapping.get(triple.object, triple.object)
            if subject is None or obj is None:
                continue
            curated.add_triple(subject, triple.relation, obj, triple.stage)
        return curated

    async def curate(self, result: ExtractionResult) -> tuple[ExtractionResult, CurationReport]:
        """
        Clean every paper's candidates.

        Returns:
            (curated result, report of labels and actions)
        """
        report = CurationReport()
        papers = [await self._curate_paper(paper, report) for paper in result.papers]
        logger.info(
            "candidates_curated",
            judged=report.judged,
            deleted=report.deleted,
            repaired=report.repaired,
            dropped=report.dropped,
        )
        return ExtractionResult(papers), report


def run_curation(
    result: ExtractionResult, curator: Curator
) -> tuple[ExtractionResult, CurationReport]:
    return asyncio.run(curator.curate(result))
