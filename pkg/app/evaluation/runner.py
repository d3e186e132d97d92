"""
Evaluation runs.

A system is any callable from question text to answer text, sync or
async. Items are answered concurrently and reported in dataset order; a
failing item is recorded and the run continues.
"""

import asyncio
import inspect
from collections.abc import Awaitable, Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

from app.core.exceptions import EmptyDatasetError, KnowledgeGraphError
from app.evaluation.dataset import QAItem
from app.evaluation.scoring import ExactTokenScorer, ScoreTriplet, TokenScorer, score_pair
from app.reasoning.chains import QAEngine
from app.reasoning.llm import LLMGateway
from app.reasoning.prompts import BASELINE_ANSWER
from app.utils import get_logger

logger = get_logger(__name__)

AnswerFunction = Callable[[str], str | Awaitable[str]]


@dataclass
class ItemResult:
    item_id: str
    question: str
    reference: str
    candidate: str | None = None
    score: ScoreTriplet | None = None
    error_code: str | None = None
    error: str | None = None

    @property
    def scored(self) -> bool:
        return self.score is not None

    def to_record(self) -> dict[str, Any]:
        return {
            "item_id": self.item_id,
            "question": self.question,
            "reference_answer": self.reference,
            "candidate_answer": self.candidate,
            **(self.score.to_dict() if self.score else {}),
            "error_code": self.error_code,
            "error": self.error,
        }


@dataclass
class EvalReport:
    system_id: str
    scorer_id: str
    items: list[ItemResult] = field(default_factory=list)

    @property
    def scored(self) -> list[ItemResult]:
        return [item for item in self.items if item.score is not None]

    @property
    def failed(self) -> list[ItemResult]:
        return [item for item in self.items if item.score is None]

    def _mean(self, name: str) -> float:
        scores = [getattr(item.score, name) for item in self.scored]
        return sum(scores) / len(scores) if scores else 0.0

    @property
    def mean(self) -> dict[str, float]:
        return {name: self._mean(name) for name in ("precision", "recall", "f1")}

    def summary(self) -> dict[str, Any]:
        return {
            "system": self.system_id,
            "scorer": self.scorer_id,
            "items": len(self.items),
            "scored": len(self.scored),
            "failed": len(self.failed),
            **{f"mean_{name}": value for name, value in self.mean.items()},
        }

    def to_records(self) -> list[dict[str, Any]]:
        """Per-item records followed by one summary record."""
        return [item.to_record() for item in self.items] + [{"summary": self.summary()}]

    def render_table(self) -> str:
        width = max([len("item"), *(len(item.item_id) for item in self.items)]) + 2
        header = f"{'item':<{width}}{'P':>9}{'R':>9}{'F1':>9}  note"
        lines = [header, "-" * len(header)]
        for item in self.items:
            if item.score is not None:
                p, r, f = item.score.precision, item.score.recall, item.score.f1
                lines.append(f"{item.item_id:<{width}}{p:>9.4f}{r:>9.4f}{f:>9.4f}")
            else:
                lines.append(f"{item.item_id:<{width}}{'-':>9}{'-':>9}{'-':>9}  {item.error_code}")
        mean = self.mean
        lines.append("-" * len(header))
        lines.append(
            f"{'mean':<{width}}{mean['precision']:>9.4f}{mean['recall']:>9.4f}{mean['f1']:>9.4f}"
            f"  {len(self.scored)}/{len(self.items)} scored"
        )
        return "\n".join(lines)


async def _answer(system: AnswerFunction, question: str) -> str:
    answer = system(question)
    if inspect.isawaitable(answer):
        answer = await answer
    return answer


async def _run_item(item: QAItem, system: AnswerFunction, scorer: TokenScorer) -> ItemResult:
    result = ItemResult(item.item_id, item.question, item.reference_answer)
    try:
        result.candidate = await _answer(system, item.question)
        result.score = score_pair(result.candidate, item.reference_answer, scorer)
    except KnowledgeGraphError as e:
        result.error_code, result.error = e.code, e.message
        logger.warning("eval_item_failed", item_id=item.item_id, code=e.code)
    return result


async def evaluate(
    system: AnswerFunction,
    dataset: Sequence[QAItem],
    scorer: TokenScorer | None = None,
    system_id: str = "system",
) -> EvalReport:
    """
    Answer and score every item.

    Raises:
        EmptyDatasetError: If the dataset has no items
    """
    if not dataset:
        raise EmptyDatasetError("Cannot evaluate an empty dataset")
    scorer = scorer or ExactTokenScorer()
    results = await asyncio.gather(*(_run_item(item, system, scorer) for item in dataset))
    report = EvalReport(system_id, scorer.scorer_id, list(results))
    logger.info("eval_finished", **report.summary())
    return report


def run_eval(
    system: AnswerFunction,
    dataset: Sequence[QAItem],
    scorer: TokenScorer | None = None,
    system_id: str = "system",
) -> EvalReport:
    """Synchronous entry point for the CLI."""
    return asyncio.run(evaluate(system, dataset, scorer, system_id))


# =============================================================================
# SYSTEMS
# =============================================================================


def kg_system(engine: QAEngine) -> AnswerFunction:
    """Sub-graph community summary answers over a loaded graph."""

    async def answer(question: str) -> str:
        return (await engine.ask(question)).answer

    return answer


def llm_only_system(gateway: LLMGateway) -> AnswerFunction:
    """Question-only baseline without the graph."""

    async def answer(question: str) -> str:
        result = await gateway.complete_text(BASELINE_ANSWER, question=question)
        return result.text.strip()

    return answer
