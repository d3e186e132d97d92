"""API v1 router aggregator."""

from fastapi import APIRouter

from app.api.v1.endpoints import ask, graph, health

api_router = APIRouter()

# Health check
api_router.include_router(
    health.router,
    prefix="/health",
    tags=["Health"],
)

# Schema, entities, papers and stats
api_router.include_router(
    graph.router,
    tags=["Graph"],
)

# Question answering
api_router.include_router(
    ask.router,
    prefix="/ask",
    tags=["QA"],
)
