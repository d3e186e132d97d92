"""Structured completions with a bounded re-ask loop."""

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Generic, TypeVar

from app.core.exceptions import UnparseableOutputError
from app.reasoning.llm import CompletionRequest, CompletionResult, LLMGateway
from app.reasoning.prompts import REASK
from app.utils import get_logger, truncate_text

logger = get_logger(__name__)

T = TypeVar("T")


@dataclass
class StructuredResult(Generic[T]):
    value: T
    completions: list[CompletionResult] = field(default_factory=list)

    @property
    def first(self) -> CompletionResult:
        return self.completions[0]


async def complete_structured(
    gateway: LLMGateway,
    request: CompletionRequest,
    parser: Callable[[str], T],
    max_reasks: int = 2,
    error_cls: type[UnparseableOutputError] = UnparseableOutputError,
) -> StructuredResult[T]:
    """
    Complete and parse, re-asking with the parse error appended.

    Args:
        gateway: Completion gateway
        request: Original request
        parser: Raises ValueError on output it cannot parse
        max_reasks: Re-asks allowed after the first completion

    Raises:
        UnparseableOutputError (or ``error_cls``): After the last re-ask fails
    """
    completions: list[CompletionResult] = []
    current = request
    original_prompt: str | None = None
    while True:
        result = await gateway.complete(current)
        completions.append(result)
        if original_prompt is None:
            original_prompt = result.prompt
        try:
            return StructuredResult(parser(result.text), completions)
        except ValueError as e:
            reasks_used = len(completions) - 1
            logger.warning(
                "completion_unparseable",
                template_id=request.template_id,
                reask=reasks_used,
                error=str(e),
            )
            if reasks_used >= max_reasks:
                raise error_cls(
                    f"Unparseable output for '{request.template_id}' after "
                    f"{len(completions)} completion(s): {e}",
                    details={
                        "template_id": request.template_id,
                        "error": str(e),
                        "last_output": truncate_text(result.text, 200),
                        "digests": [c.prompt_digest for c in completions],
                    },
                ) from e
            current = CompletionRequest(
                REASK,
                {
                    "original_prompt": original_prompt,
                    "previous_output": result.text,
                    "error": str(e),
                },
                max_tokens=request.max_tokens,
                temperature=request.temperature,
            )
