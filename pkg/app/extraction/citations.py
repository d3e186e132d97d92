"""
Citation Classification

Labels a citation context as direct use, task related or unrelated.
The default classifier matches the cue lexicon shipped in
``app/resources/lexicons/citation_cues.txt``; an LLM classifier can take
its place through the same interface.
"""

import re
from typing import Protocol

from app.core.config import Settings
from app.core.exceptions import ClassifierUnavailableError, KnowledgeGraphError
from app.corpus.models import CitationContext
from app.extraction.models import CitationLabel, CitationRelation
from app.extraction.parsing import parse_citation_label
from app.reasoning.llm import CompletionRequest, LLMGateway
from app.reasoning.prompts import CITATION_CLASSIFICATION
from app.reasoning.structured import complete_structured
from app.utils import get_logger
from app.utils.resources import read_lexicon

logger = get_logger(__name__)

CUE_LEXICON = "citation_cues.txt"


class CitationClassifier(Protocol):
    classifier_id: str

    async def classify(self, context: CitationContext) -> CitationLabel: ...


def _cue_pattern(cue: str) -> re.Pattern[str]:
    return re.compile(rf"(?<!\w){re.escape(cue)}(?!\w)")


class CueLexiconClassifier:
    """
    Rule classifier over cue phrases.

    Direct-use cues take precedence; confidence grows with the number of
    distinct cues found and is 1.0 for a context with no cue at all.
    """

    classifier_id = "cue-lexicon"

    def __init__(
        self,
        direct_use: list[str] | None = None,
        task_related: list[str] | None = None,
    ) -> None:
        if direct_use is None or task_related is None:
            try:
                sections = read_lexicon(CUE_LEXICON)
            except (FileNotFoundError, OSError) as e:
                raise ClassifierUnavailableError(f"Cue lexicon unavailable: {e}") from e
            direct_use = sections.get("direct_use", []) if direct_use is None else direct_use
            task_related = (
                sections.get("task_related", []) if task_related is None else task_related
            )
        self._direct = [_cue_pattern(cue.casefold()) for cue in direct_use]
        self._task = [_cue_pattern(cue.casefold()) for cue in task_related]

    @staticmethod
    def _hits(patterns: list[re.Pattern[str]], text: str) -> int:
        return sum(1 for pattern in patterns if pattern.search(text))

    def label(self, context_text: str) -> CitationLabel:
        text = context_text.casefold()
        direct = self._hits(self._direct, text)
        if direct:
            return CitationLabel(CitationRelation.DIRECT_USE, min(1.0, 0.5 + 0.25 * direct))
        task = self._hits(self._task, text)
        if task:
            return CitationLabel(CitationRelation.TASK_RELATED, min(1.0, 0.5 + 0.25 * task))
        return CitationLabel(CitationRelation.UNRELATED, 1.0)

    async def classify(self, context: CitationContext) -> CitationLabel:
        return self.label(context.context_text)


class LLMCitationClassifier:
    """External-model slot backed by the completion gateway."""

    classifier_id = "llm"

    def __init__(self, gateway: LLMGateway, max_reasks: int = 2) -> None:
        self.gateway = gateway
        self.max_reasks = max_reasks

    async def classify(self, context: CitationContext) -> CitationLabel:
        request = CompletionRequest(
            CITATION_CLASSIFICATION,
            {"cited_title": context.cited_title, "context": context.context_text},
        )
        try:
            result = await complete_structured(
                self.gateway, request, parse_citation_label, self.max_reasks
            )
        except KnowledgeGraphError as e:
            raise ClassifierUnavailableError(
                f"Citation classifier failed: {e.message}", details={"cause": e.code}
            ) from e
        return CitationLabel(result.value, 1.0)


def build_classifier(
    settings: Settings, gateway: LLMGateway | None = None
) -> CueLexiconClassifier | LLMCitationClassifier:
    if settings.CITATION_CLASSIFIER == "llm":
        if gateway is None:
            raise ClassifierUnavailableError("LLM citation classifier needs a gateway")
        return LLMCitationClassifier(gateway, settings.EXTRACTION_MAX_REASKS)
    return CueLexiconClassifier()


async def classify_citation(
    context: CitationContext, classifier: CitationClassifier | None = None
) -> CitationLabel:
    """Label one citation context (cue-lexicon rules unless a classifier is given)."""
    return await (classifier or CueLexiconClassifier()).classify(context)
