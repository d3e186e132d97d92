"""FastAPI Application Entrypoint."""

from collections.abc import AsyncGenerator
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse

from app import __version__
from app.api.middleware import RateLimitMiddleware, RequestLoggingMiddleware
from app.api.v1.deps import ServiceState
from app.api.v1.router import api_router
from app.core.config import Settings, settings as default_settings
from app.core.exceptions import (
    ConfigurationError,
    EmptyQuestionError,
    KnowledgeGraphError,
    RequestRejectedError,
    StageError,
    UnknownEntityError,
    UnknownKindError,
)
from app.embedding import build_embedder
from app.graph import load_snapshot
from app.reasoning.backends import build_gateway
from app.reasoning.chains import QAEngine
from app.utils import file_sha256, get_logger

logger = get_logger(__name__)

# Error code -> HTTP status; anything else is a server-side failure.
STATUS_BY_CODE = {
    RequestRejectedError.code: status.HTTP_400_BAD_REQUEST,
    EmptyQuestionError.code: status.HTTP_400_BAD_REQUEST,
    UnknownKindError.code: status.HTTP_422_UNPROCESSABLE_ENTITY,
    UnknownEntityError.code: status.HTTP_404_NOT_FOUND,
}


def load_service(settings: Settings) -> ServiceState:
    """
    Load the snapshot read-only and build the QA engine over it.

    Raises:
        ConfigurationError: If no snapshot path is configured
        SnapshotIOError, CorruptSnapshotError, SnapshotVersionError
    """
    if not settings.SNAPSHOT_PATH:
        raise ConfigurationError("SNAPSHOT_PATH is required to serve")
    snapshot = load_snapshot(settings.SNAPSHOT_PATH, frozen=True)
    gateway = build_gateway(settings)
    engine = QAEngine.from_settings(settings, snapshot.store, gateway, build_embedder(settings))
    return ServiceState(
        settings=settings,
        snapshot=snapshot,
        snapshot_sha256=file_sha256(settings.SNAPSHOT_PATH),
        engine=engine,
    )


async def knowledge_graph_error_handler(request: Request, exc: Exception) -> JSONResponse:
    assert isinstance(exc, KnowledgeGraphError)
    stage = exc.stage if isinstance(exc, StageError) else None
    status_code = STATUS_BY_CODE.get(exc.code, status.HTTP_500_INTERNAL_SERVER_ERROR)
    logger.warning(
        "request_failed",
        path=request.url.path,
        code=exc.code,
        stage=stage,
        error=exc.message,
    )
    body = {"code": exc.code, "stage": stage, "message": exc.message, "details": exc.details}
    return JSONResponse(status_code=status_code, content={"error": body})


def create_app(settings: Settings | None = None) -> FastAPI:
    """Create and configure the FastAPI application."""
    settings = settings or default_settings

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncGenerator[None, None]:
        # Startup fails if the snapshot cannot be loaded.
        app.state.service = load_service(settings)
        logger.info(
            "service_started",
            snapshot=settings.SNAPSHOT_PATH,
            sha256=app.state.service.snapshot_sha256,
        )
        yield
        logger.info("service_stopped")

    app = FastAPI(
        title="Academic Knowledge Graph",
        description="Read-only query service over an academic knowledge graph snapshot",
        version=__version__,
        lifespan=lifespan,
        docs_url="/docs",
        redoc_url="/redoc",
    )

    app.add_middleware(RateLimitMiddleware, per_minute=settings.RATE_LIMIT_PER_MINUTE)
    app.add_middleware(RequestLoggingMiddleware)
    app.add_exception_handler(KnowledgeGraphError, knowledge_graph_error_handler)

    app.include_router(api_router, prefix="/api/v1")

    @app.get("/")
    async def root() -> dict[str, str]:
        return {
            "name": "Academic Knowledge Graph",
            "version": __version__,
            "docs": "/docs",
        }

    return app


app = create_app()
