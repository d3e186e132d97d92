"""Health check endpoint."""

from fastapi import APIRouter

from app import __version__
from app.api.v1.deps import ServiceDep
from app.api.v1.schemas import HealthResponse
from app.graph.snapshot import FORMAT_VERSION

router = APIRouter()


@router.get(
    "",
    response_model=HealthResponse,
    summary="Health check",
    description="Service status and the identity of the snapshot being served.",
)
async def health_check(service: ServiceDep) -> HealthResponse:
    snapshot = service.snapshot
    return HealthResponse(
        status="healthy",
        snapshot_sha256=service.snapshot_sha256,
        snapshot_version=FORMAT_VERSION,
        pipeline_version=snapshot.pipeline_version,
        corpus_hash=snapshot.corpus_hash,
        version=__version__,
    )


@router.get(
    "/live",
    summary="Liveness check",
    description="Check if service is alive.",
)
async def liveness_check() -> dict[str, str]:
    return {"status": "alive"}
