"""
Sub-graph Community Summary

Question answering over the knowledge graph:

1. Identify the question's relevant elements and target kind.
2. Match the elements to graph entities.
3. Walk matched entities to their Titles and each Title to its target
   elements.
4. When the retrieved titles share inter-paper edges, answer once per
   community of connected titles and summarize the community answers into a
   global answer. Otherwise answer once over all retrieved elements.

Without evidence the engine answers unguided (flagged in the trace) or
returns a fixed insufficient-evidence answer, depending on configuration.
"""

import asyncio
from dataclasses import dataclass, field
from typing import Any, Literal

from app.core.config import Settings
from app.core.exceptions import KnowledgeGraphError, NoMatchesError, StageError
from app.embedding import EmbeddingProvider
from app.graph.store import GraphStore
from app.reasoning.intent import Intent, identify_intent
from app.reasoning.llm import CompletionResult, LedgerEntry, LLMGateway
from app.reasoning.prompts import (
    COMMUNITY_ANSWER,
    DIRECT_ANSWER,
    GLOBAL_ANSWER,
    INSUFFICIENT_EVIDENCE_ANSWER,
    UNGUIDED_ANSWER,
)
from app.retrieval.communities import Community, form_communities
from app.retrieval.engine import MatchResult, SubGraphBundle, match_entities, retrieve_subgraph
from app.utils import get_logger

logger = get_logger(__name__)

Mode = Literal["community", "direct"]

# Stage names carried by StageError.
STAGE_INTENT = "intent"
STAGE_MATCH = "match"
STAGE_RETRIEVE = "retrieve"
STAGE_COMMUNITY_ANSWER = "community_answer"
STAGE_GLOBAL_ANSWER = "global_answer"
STAGE_DIRECT_ANSWER = "direct_answer"
STAGE_UNGUIDED_ANSWER = "unguided_answer"


# =============================================================================
# TRACE STRUCTURES
# =============================================================================


@dataclass
class CommunityAnswer:
    community: Community
    text: str
    prompt_digest: str

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.community.to_dict(),
            "answer": self.text,
            "prompt_digest": self.prompt_digest,
        }


@dataclass
class AnswerTrace:
    """
    Everything one ``ask`` did.

    mode=direct implies no community answers; mode=community implies one
    answer per community. ``no_evidence`` marks questions nothing matched.
    """

    question: str
    intent: Intent | None = None
    matches: MatchResult | None = None
    bundle: SubGraphBundle | None = None
    communities: list[Community] = field(default_factory=list)
    community_answers: list[CommunityAnswer] = field(default_factory=list)
    global_answer: str | None = None
    answer: str = ""
    mode: Mode = "direct"
    no_evidence: bool = False
    unguided: bool = False
    truncated: bool = False
    prompt_digests: dict[str, list[str]] = field(default_factory=dict)
    ledger: list[LedgerEntry] = field(default_factory=list)

    def note(self, stage: str, completions: list[CompletionResult]) -> None:
        self.prompt_digests.setdefault(stage, []).extend(c.prompt_digest for c in completions)

    @property
    def completions(self) -> int:
        return len(self.ledger)

    def to_report(self) -> dict[str, Any]:
        """Structured audit record."""
        return {
            "question": self.question,
            "mode": self.mode,
            "no_evidence": self.no_evidence,
            "unguided": self.unguided,
            "truncated": self.truncated,
            "intent": self.intent.to_dict() if self.intent else None,
            "matches": self.matches.to_dict() if self.matches else None,
            "bundle": self.bundle.to_dict() if self.bundle else None,
            "communities": [c.to_dict() for c in self.communities],
            "community_answers": [a.to_dict() for a in self.community_answers],
            "global_answer": self.global_answer,
            "answer": self.answer,
            "prompt_digests": self.prompt_digests,
            "ledger": [entry.to_dict() for entry in self.ledger],
        }


# =============================================================================
# ENGINE
# =============================================================================


class QAEngine:
    """
    Answers questions over a loaded graph.

    The store is only read; one engine can serve concurrent ``ask`` calls.
    """

    def __init__(
        self,
        store: GraphStore,
        gateway: LLMGateway,
        *,
        embedder: EmbeddingProvider | None = None,
        max_reasks: int = 2,
        context_chars: int = 8000,
        match_threshold: float = 0.85,
        unguided_fallback: bool = True,
    ) -> None:
        self.store = store
        self.gateway = gateway
        self.embedder = embedder
        self.max_reasks = max_reasks
        self.context_chars = context_chars
        self.match_threshold = match_threshold
        self.unguided_fallback = unguided_fallback

    @classmethod
    def from_settings(
        cls,
        settings: Settings,
        store: GraphStore,
        gateway: LLMGateway,
        embedder: EmbeddingProvider | None = None,
    ) -> "QAEngine":
        return cls(
            store,
            gateway,
            embedder=embedder if settings.QA_EMBEDDING_FALLBACK else None,
            max_reasks=settings.EXTRACTION_MAX_REASKS,
            context_chars=settings.QA_CONTEXT_CHARS,
            match_threshold=settings.QA_MATCH_THRESHOLD,
            unguided_fallback=settings.QA_UNGUIDED_FALLBACK,
        )

    # =========================================================================
    # ANSWERING STAGES
    # =========================================================================

    async def answer_community(
        self, question: str, community: Community, bundle: SubGraphBundle
    ) -> tuple[CompletionResult, bool]:
        """A_c over question, community elements, introductions, prompt; with a truncation flag."""
        elements, truncated = bundle.render_elements(community.title_ids, self.context_chars)
        result = await self.gateway.complete_text(
            COMMUNITY_ANSWER,
            question=question,
            elements=elements,
            introductions=bundle.render_introductions(),
        )
        return result, truncated

    async def answer_global(
        self, question: str, community_answers: list[str]
    ) -> CompletionResult:
        """A_g over every community answer in community order, then the question."""
        return await self.gateway.complete_text(
            GLOBAL_ANSWER,
            partial_results="\n\n".join(community_answers),
            question=question,
        )

    async def answer_direct(
        self, question: str, bundle: SubGraphBundle
    ) -> tuple[CompletionResult, bool]:
        elements, truncated = bundle.render_elements(max_chars=self.context_chars)
        result = await self.gateway.complete_text(
            DIRECT_ANSWER,
            question=question,
            elements=elements,
            introductions=bundle.render_introductions(),
        )
        return result, truncated

    async def _no_evidence(self, trace: AnswerTrace) -> None:
        trace.no_evidence = True
        trace.mode = "direct"
        if not self.unguided_fallback:
            trace.answer = INSUFFICIENT_EVIDENCE_ANSWER
            return
        result = await self._stage(
            STAGE_UNGUIDED_ANSWER,
            trace,
            self.gateway.complete_text(UNGUIDED_ANSWER, question=trace.question),
        )
        trace.note(STAGE_UNGUIDED_ANSWER, [result])
        trace.answer = result.text
        trace.unguided = True

    @staticmethod
    async def _stage(stage: str, trace: AnswerTrace, awaitable: Any) -> Any:
        try:
            return await awaitable
        except StageError:
            raise
        except KnowledgeGraphError as e:
            logger.warning("qa_stage_failed", stage=stage, code=e.code, error=e.message)
            raise StageError(stage, e, partial=trace) from e

    # =========================================================================
    # ASK
    # =========================================================================

    async def ask(self, question: str) -> AnswerTrace:
        """
        Answer a question end to end.

        Returns:
            AnswerTrace with the answer and every intermediate result

        Raises:
            StageError: Carrying the stage name and the partial trace
        """
        trace = AnswerTrace(question)
        with self.gateway.recording() as ledger:
            try:
                await self._ask(trace)
            finally:
                trace.ledger = ledger.entries()
        logger.info(
            "question_answered",
            mode=trace.mode,
            communities=len(trace.communities),
            completions=trace.completions,
            no_evidence=trace.no_evidence,
            unguided=trace.unguided,
        )
        return trace

    async def _ask(self, trace: AnswerTrace) -> None:
        question = trace.question
        completions: list[CompletionResult] = []
        try:
            trace.intent = await self._stage(
                STAGE_INTENT,
                trace,
                identify_intent(question, self.gateway, self.max_reasks, completions),
            )
        finally:
            trace.note(STAGE_INTENT, completions)
        intent = trace.intent

        try:
            trace.matches = match_entities(
                intent, self.store, self.embedder, self.match_threshold
            )
        except NoMatchesError:
            await self._no_evidence(trace)
            return
        except KnowledgeGraphError as e:
            raise StageError(STAGE_MATCH, e, partial=trace) from e

        try:
            trace.bundle = bundle = retrieve_subgraph(
                trace.matches.entity_ids, intent.target_kind, self.store
            )
        except KnowledgeGraphError as e:
            raise StageError(STAGE_RETRIEVE, e, partial=trace) from e
        if not len(bundle):
            await self._no_evidence(trace)
            return

        trace.communities = form_communities(bundle, self.store)
        if all(not c.internal_edges for c in trace.communities):
            trace.communities = []
            trace.mode = "direct"
            result, trace.truncated = await self._stage(
                STAGE_DIRECT_ANSWER, trace, self.answer_direct(question, bundle)
            )
            trace.note(STAGE_DIRECT_ANSWER, [result])
            trace.answer = result.text
            return

        trace.mode = "community"
        answered = await self._stage(
            STAGE_COMMUNITY_ANSWER,
            trace,
            asyncio.gather(
                *(self.answer_community(question, c, bundle) for c in trace.communities)
            ),
        )
        for community, (result, truncated) in zip(trace.communities, answered, strict=True):
            trace.community_answers.append(
                CommunityAnswer(community, result.text, result.prompt_digest)
            )
            trace.truncated = trace.truncated or truncated
        trace.note(STAGE_COMMUNITY_ANSWER, [result for result, _ in answered])

        final = await self._stage(
            STAGE_GLOBAL_ANSWER,
            trace,
            self.answer_global(question, [a.text for a in trace.community_answers]),
        )
        trace.note(STAGE_GLOBAL_ANSWER, [final])
        trace.global_answer = trace.answer = final.text
