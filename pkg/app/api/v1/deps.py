"""Dependency injection for API endpoints."""

from dataclasses import dataclass
from typing import Annotated

from fastapi import Depends, Request

from app.core.config import Settings
from app.graph import GraphSnapshot, GraphStore
from app.reasoning.chains import QAEngine


@dataclass
class ServiceState:
    """Everything the lifespan loads once; read-only afterwards."""

    settings: Settings
    snapshot: GraphSnapshot
    snapshot_sha256: str
    engine: QAEngine


def get_service(request: Request) -> ServiceState:
    service: ServiceState = request.app.state.service
    return service


def get_store(service: Annotated[ServiceState, Depends(get_service)]) -> GraphStore:
    return service.snapshot.store


def get_engine(service: Annotated[ServiceState, Depends(get_service)]) -> QAEngine:
    return service.engine


# Type aliases for dependency injection
ServiceDep = Annotated[ServiceState, Depends(get_service)]
StoreDep = Annotated[GraphStore, Depends(get_store)]
EngineDep = Annotated[QAEngine, Depends(get_engine)]
