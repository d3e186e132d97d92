"""Question answering endpoint."""

from fastapi import APIRouter

from app.api.v1.deps import EngineDep, ServiceDep
from app.api.v1.schemas import AskRequest, AskResponse, CommunitySummary, ErrorResponse
from app.core.exceptions import RequestRejectedError
from app.reasoning.chains import AnswerTrace

router = APIRouter()


def summarize(trace: AnswerTrace, include_trace: bool = False) -> AskResponse:
    """Response body for one answered question."""
    return AskResponse(
        question=trace.question,
        answer=trace.answer,
        mode=trace.mode,
        no_evidence=trace.no_evidence,
        unguided=trace.unguided,
        truncated=trace.truncated,
        target_kind=trace.intent.target_kind.value if trace.intent else None,
        matched_entity_ids=trace.matches.entity_ids if trace.matches else [],
        title_ids=trace.bundle.title_ids if trace.bundle else [],
        communities=[
            CommunitySummary(title_ids=list(a.community.title_ids), answer=a.text)
            for a in trace.community_answers
        ],
        completions=trace.completions,
        trace=trace.to_report() if include_trace else None,
    )


@router.post(
    "",
    response_model=AskResponse,
    responses={400: {"model": ErrorResponse}, 500: {"model": ErrorResponse}},
    summary="Answer a question",
    description=(
        "Sub-graph community summary over the served snapshot. Identifies the question's "
        "elements, retrieves the connected papers and answers per community of papers."
    ),
)
async def ask_question(request: AskRequest, service: ServiceDep, engine: EngineDep) -> AskResponse:
    limit = service.settings.MAX_QUESTION_CHARS
    if len(request.question) > limit:
        raise RequestRejectedError(
            f"Question longer than {limit} characters",
            details={"length": len(request.question), "limit": limit},
        )
    trace = await engine.ask(request.question)
    return summarize(trace, request.include_trace)
