"""
Intent Identification

One completion turns a question into its relevant elements and the kind of
element being asked for. Expected completion::

    Entities: text summarization (task), control the length of text summarization (problem)
    Question: method

Surfaces are kept verbatim; kind names are case-insensitive and tolerate
plurals.
"""

import re
from dataclasses import dataclass
from typing import Any

from app.core.exceptions import EmptyQuestionError, UnparseableIntentError
from app.ontology import INTENT_KINDS, EntityKind
from app.reasoning.llm import CompletionRequest, CompletionResult, LLMGateway
from app.reasoning.prompts import INTENT
from app.reasoning.structured import complete_structured

_ENTITIES_RE = re.compile(r"^\s*entities\s*:\s*(.*)$", re.IGNORECASE | re.MULTILINE)
_QUESTION_RE = re.compile(r"^\s*question\s*:\s*(.+?)\s*$", re.IGNORECASE | re.MULTILINE)
_ELEMENT_RE = re.compile(r"\s*(.+?)\s*\(([^()]+)\)\s*(?:,|$)")


@dataclass(frozen=True)
class RelevantElement:
    surface: str
    kind: EntityKind

    def to_dict(self) -> dict[str, str]:
        return {"surface": self.surface, "kind": self.kind.value}


@dataclass(frozen=True)
class Intent:
    question: str
    relevant_elements: tuple[RelevantElement, ...]
    target_kind: EntityKind

    def to_dict(self) -> dict[str, Any]:
        return {
            "question": self.question,
            "relevant_elements": [e.to_dict() for e in self.relevant_elements],
            "target_kind": self.target_kind.value,
        }


def parse_intent(text: str) -> tuple[tuple[RelevantElement, ...], EntityKind]:
    """
    Read the ``Entities:`` and ``Question:`` lines.

    Raises:
        ValueError: On a missing line, an unknown kind or no elements
    """
    entities = _ENTITIES_RE.search(text)
    question = _QUESTION_RE.search(text)
    if entities is None or question is None:
        raise ValueError("expected 'Entities: ...' and 'Question: <kind>' lines")

    elements: list[RelevantElement] = []
    for match in _ELEMENT_RE.finditer(entities.group(1)):
        kind = EntityKind.parse(match.group(2))
        if kind not in INTENT_KINDS:
            raise ValueError(f"element kind {kind.value!r} is not a question category")
        element = RelevantElement(match.group(1).strip(), kind)
        if element.surface and element not in elements:
            elements.append(element)
    if not elements:
        raise ValueError("no '<surface> (<kind>)' elements on the Entities line")
    return tuple(elements), EntityKind.parse(question.group(1).strip().rstrip("."))


async def identify_intent(
    question: str,
    gateway: LLMGateway,
    max_reasks: int = 2,
    trace: list[CompletionResult] | None = None,
) -> Intent:
    """
    Identify the relevant elements and target kind of a question.

    Raises:
        EmptyQuestionError: If the question is blank
        UnparseableIntentError: After the re-ask budget
    """
    if not question or not question.strip():
        raise EmptyQuestionError("Question is empty")
    result = await complete_structured(
        gateway,
        CompletionRequest(INTENT, {"question": question}),
        parse_intent,
        max_reasks,
        UnparseableIntentError,
    )
    if trace is not None:
        trace.extend(result.completions)
    elements, target = result.value
    return Intent(question, elements, target)
