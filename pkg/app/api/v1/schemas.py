"""API Request/Response schemas."""

from typing import Any

from pydantic import BaseModel, Field

# =============================================================================
# HEALTH
# =============================================================================


class HealthResponse(BaseModel):
    """Service health and the snapshot being served."""

    status: str
    snapshot_sha256: str
    snapshot_version: int
    pipeline_version: str | None
    corpus_hash: str | None
    version: str


# =============================================================================
# ENTITIES / PAPERS
# =============================================================================


class EntityItem(BaseModel):
    entity_id: int
    kind: str
    surface: str
    provenance: list[str] = Field(default_factory=list)


class EdgeItem(BaseModel):
    """One triple touching an entity, with both endpoint surfaces."""

    subject_id: int
    relation: str
    object_id: int
    subject: str
    object: str


class EntityDetail(EntityItem):
    edges: list[EdgeItem] = Field(default_factory=list)


class EntityLookupResponse(BaseModel):
    kind: str
    surface: str
    total_found: int
    entities: list[EntityDetail]


class PaperResponse(BaseModel):
    """A paper's Title entity and every element attached to it."""

    corpus_id: str
    title: EntityItem
    elements: dict[str, list[EntityItem]]
    edges: list[EdgeItem]


# =============================================================================
# STATS
# =============================================================================


class StatsResponse(BaseModel):
    entities: dict[str, int]
    relations: dict[str, int]
    total_entities: int
    total_triples: int


# =============================================================================
# ASK
# =============================================================================


class AskRequest(BaseModel):
    question: str = Field(..., min_length=1, description="Question over the graph")
    include_trace: bool = Field(default=False, description="Return the full answer trace")


class CommunitySummary(BaseModel):
    title_ids: list[int]
    answer: str


class AskResponse(BaseModel):
    """Answer plus the trace summary; ``trace`` holds the full report on request."""

    question: str
    answer: str
    mode: str
    no_evidence: bool
    unguided: bool
    truncated: bool
    target_kind: str | None = None
    matched_entity_ids: list[int] = Field(default_factory=list)
    title_ids: list[int] = Field(default_factory=list)
    communities: list[CommunitySummary] = Field(default_factory=list)
    completions: int
    trace: dict[str, Any] | None = None


# =============================================================================
# ERRORS
# =============================================================================


class ErrorBody(BaseModel):
    code: str
    stage: str | None = None
    message: str
    details: Any = None


class ErrorResponse(BaseModel):
    error: ErrorBody
