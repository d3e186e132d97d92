"""Pytest configuration and fixtures."""

import asyncio
import json
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import pytest
from fastapi.testclient import TestClient

from app.core.config import Settings, load_settings
from app.corpus import load_corpus
from app.embedding import HashingEmbedder
from app.graph import GraphStore, load_snapshot, save_snapshot
from app.pipeline import BuildResult, GraphBuilder
from app.reasoning import LLMGateway, MockBackend, ScriptedBackend, build_gateway

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return FIXTURES / "corpus.ndjson"


@pytest.fixture(scope="session")
def mock_dir() -> Path:
    return FIXTURES / "mock"


@pytest.fixture(scope="session")
def golden() -> dict[str, Any]:
    """Hand-enumerated counts and triples of the fixture graph."""
    return json.loads((FIXTURES / "golden_graph.json").read_text(encoding="utf-8"))


def fixture_settings(**overrides: Any) -> Settings:
    """Settings for tests: mock backend over the shipped routes, console logs."""
    values: dict[str, Any] = {
        "LLM_BACKEND": "mock",
        "LLM_FIXTURES_DIR": str(FIXTURES / "mock"),
        "LLM_STRICT": True,
        "EMBEDDING_PROVIDER": "mock",
        "LOG_JSON": False,
        "LLM_BACKOFF_INITIAL": 0.0,
        "LLM_BACKOFF_MAX": 0.0,
    }
    values.update(overrides)
    return load_settings(None, **values)


@pytest.fixture
def settings() -> Settings:
    return fixture_settings()


@pytest.fixture
def gateway(settings: Settings) -> LLMGateway:
    """Gateway over the fixture routes."""
    return build_gateway(settings)


@pytest.fixture
def embedder() -> HashingEmbedder:
    return HashingEmbedder(64)


def scripted_gateway(script: Any) -> tuple[LLMGateway, ScriptedBackend]:
    """Gateway over a ScriptedBackend, without retry delays."""
    backend = ScriptedBackend(script)
    return build_gateway(fixture_settings(), backend), backend


def mock_gateway(strict: bool = True) -> tuple[LLMGateway, MockBackend]:
    """Gateway over an empty in-memory MockBackend."""
    backend = MockBackend(strict=strict)
    return build_gateway(fixture_settings(), backend), backend


# =============================================================================
# BUILT GRAPH
# =============================================================================


def build_fixture_graph(settings: Settings | None = None) -> tuple[BuildResult, LLMGateway]:
    settings = settings or fixture_settings()
    gateway = build_gateway(settings)
    builder = GraphBuilder(settings, gateway, HashingEmbedder(settings.EMBEDDING_DIMENSION))
    result = asyncio.run(builder.build(load_corpus(FIXTURES / "corpus.ndjson")))
    return result, gateway


@pytest.fixture(scope="session")
def built() -> tuple[BuildResult, LLMGateway]:
    """One full mock build of the fixture corpus."""
    return build_fixture_graph()


@pytest.fixture(scope="session")
def snapshot_path(
    built: tuple[BuildResult, LLMGateway], tmp_path_factory: pytest.TempPathFactory
) -> Path:
    path = tmp_path_factory.mktemp("graph") / "fixture.snap"
    save_snapshot(built[0].store, path)
    return path


@pytest.fixture
def store(snapshot_path: Path) -> GraphStore:
    """Read-only store loaded from the fixture snapshot."""
    return load_snapshot(snapshot_path).store


@pytest.fixture
def client(snapshot_path: Path) -> Iterator[TestClient]:
    """Test client for the query service over the fixture snapshot."""
    from app.main import create_app

    app = create_app(fixture_settings(SNAPSHOT_PATH=str(snapshot_path)))
    with TestClient(app) as test_client:
        yield test_client
