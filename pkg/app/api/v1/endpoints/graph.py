"""Read-only graph endpoints: schema, entity lookup, paper detail, stats."""

from typing import Any

from fastapi import APIRouter, Query

from app.api.v1.deps import ServiceDep, StoreDep
from app.api.v1.schemas import EntityLookupResponse, PaperResponse, StatsResponse
from app.core.exceptions import UnknownKindError
from app.graph import entity_view, paper_view
from app.ontology import EntityKind, export_schema

router = APIRouter()


@router.get(
    "/schema",
    summary="Schema introspection",
    description="Entity kinds with introductions, relations and every legal signature.",
)
async def get_schema() -> dict[str, Any]:
    return export_schema()


@router.get(
    "/entities",
    response_model=EntityLookupResponse,
    summary="Entity lookup",
    description="Entities of a kind whose surface matches after normalization, with edges.",
)
async def lookup_entities(
    store: StoreDep,
    kind: str = Query(..., min_length=1, description="Entity kind, e.g. Method"),
    surface: str = Query(..., min_length=1, description="Surface text"),
) -> EntityLookupResponse:
    try:
        entity_kind = EntityKind.parse(kind)
    except ValueError as e:
        raise UnknownKindError(str(e), details={"kind": kind}) from e

    entities = [entity_view(store, i) for i in store.lookup_normalized(entity_kind, surface)]
    return EntityLookupResponse.model_validate(
        {
            "kind": entity_kind.value,
            "surface": surface,
            "total_found": len(entities),
            "entities": entities,
        }
    )


@router.get(
    "/papers/{corpus_id}",
    response_model=PaperResponse,
    summary="Paper detail",
    description="A paper's Title and all of its elements.",
)
async def get_paper(corpus_id: str, store: StoreDep) -> PaperResponse:
    return PaperResponse.model_validate(paper_view(store, corpus_id))


@router.get(
    "/stats",
    response_model=StatsResponse,
    summary="Graph statistics",
    description="Entity counts per kind and triple counts per relation.",
)
async def get_stats(service: ServiceDep) -> StatsResponse:
    return StatsResponse.model_validate(service.snapshot.stats.to_dict())
