"""Core configuration and settings.

Layering, lowest to highest: field defaults, TOML config file, ``.env``,
process environment, explicit overrides (CLI flags).
"""

import os
from contextvars import ContextVar
from pathlib import Path
from typing import Any, Literal

from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from app.core.exceptions import ConfigurationError

_CONFIG_FILE: ContextVar[str | None] = ContextVar("akg_config_file", default=None)

REDACTED = "***"


class Settings(BaseSettings):
    """Toolkit settings loaded from defaults, a config file and the environment."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    APP_ENV: str = "development"
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = True
    PIPELINE_VERSION: str = "akg-pipeline/1"

    # Completion backend (OpenAI-compatible wire protocol)
    LLM_BACKEND: Literal["mock", "openai"] = "mock"
    AKG_LLM_URL: str | None = None
    AKG_LLM_KEY: str | None = None
    AKG_LLM_MODEL: str = "gpt-4-0613"
    LLM_FIXTURES_DIR: str | None = None
    LLM_STRICT: bool = True
    LLM_TEMPERATURE: float = 0.0
    LLM_MAX_TOKENS: int = 1024
    LLM_TIMEOUT: float = 60.0
    LLM_MAX_ATTEMPTS: int = 3
    LLM_BACKOFF_INITIAL: float = 1.0
    LLM_BACKOFF_MAX: float = 4.0
    LLM_PARALLELISM: int = 4

    # Embedding provider
    EMBEDDING_PROVIDER: Literal["mock", "remote"] = "mock"
    AKG_EMB_URL: str | None = None
    AKG_EMB_KEY: str | None = None
    AKG_EMB_MODEL: str = "text-embedding-3-small"
    EMBEDDING_DIMENSION: int = 64

    # Extraction
    EXTRACTION_MAX_REASKS: int = 2
    KEYWORDS_MAX: int = 5
    EXTRACTION_ELEMENT_LINKS: bool = False
    CITATION_CLASSIFIER: Literal["rules", "llm"] = "rules"

    # Curation
    CLUSTER_SAMPLE_CAP: int = 10_000
    CLUSTER_K_MIN: int = 2
    CLUSTER_K_MAX: int = 12
    CLUSTER_K: int | None = None
    CLUSTER_SEED: int = 13
    CLUSTER_MAX_ITER: int = 100
    CLUSTER_N_INIT: int = 10
    CLUSTER_ACCEPT_DISTANCE: float = 0.25
    CLUSTER_LLM_ASSIST: bool = False

    # Question answering
    QA_CONTEXT_CHARS: int = 8000
    QA_MATCH_THRESHOLD: float = 0.85
    QA_EMBEDDING_FALLBACK: bool = False
    QA_UNGUIDED_FALLBACK: bool = True

    # Evaluation
    EVAL_SCORER: Literal["exact", "embedding"] = "exact"

    # Service
    SERVICE_HOST: str = "127.0.0.1"
    SERVICE_PORT: int = 8000
    SNAPSHOT_PATH: str | None = None
    MAX_QUESTION_CHARS: int = 2000
    RATE_LIMIT_PER_MINUTE: int = 120

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        sources: list[PydanticBaseSettingsSource] = [init_settings, env_settings, dotenv_settings]
        config_file = _CONFIG_FILE.get() or os.environ.get("AKG_CONFIG_FILE")
        if config_file:
            sources.append(TomlConfigSettingsSource(settings_cls, toml_file=Path(config_file)))
        return tuple(sources)

    def snapshot(self) -> dict[str, Any]:
        """Effective configuration with secrets redacted, as recorded in run manifests."""
        data = self.model_dump(mode="json")
        for key, value in data.items():
            if key.endswith("_KEY") and value:
                data[key] = REDACTED
        return data


def load_settings(config_file: str | Path | None = None, **overrides: Any) -> Settings:
    """
    Build a Settings instance honouring every configuration layer.

    Args:
        config_file: Optional TOML file with upper-case keys
        **overrides: Highest-priority values; ``None`` entries are ignored

    Returns:
        Settings instance

    Raises:
        ConfigurationError: If the config file does not exist
    """
    if config_file is not None and not Path(config_file).is_file():
        raise ConfigurationError(
            f"Config file not found: {config_file}", details={"path": str(config_file)}
        )
    explicit = {key: value for key, value in overrides.items() if value is not None}
    token = _CONFIG_FILE.set(str(config_file) if config_file is not None else None)
    try:
        return Settings(**explicit)
    finally:
        _CONFIG_FILE.reset(token)


settings = Settings()
