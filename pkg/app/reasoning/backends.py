"""
Completion backends.

- OpenAIBackend: any OpenAI-compatible chat-completions endpoint.
- MockBackend: deterministic fixtures keyed by prompt digest, plus route rules.
- ScriptedBackend: ordered replies or failures, for tests.
"""

import json
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import openai
from openai import AsyncOpenAI

from app.core.config import Settings
from app.core.exceptions import (
    BackendUnreachableError,
    ConfigurationError,
    FixtureMissingError,
    LLMError,
    RateLimitError,
)
from app.reasoning.llm import BackendReply, LLMGateway, prompt_digest
from app.utils import get_logger

logger = get_logger(__name__)

ROUTES_FILE = "routes.json"


class OpenAIBackend:
    """Chat-completions client configured by AKG_LLM_URL / AKG_LLM_KEY / AKG_LLM_MODEL."""

    backend_id = "openai"

    def __init__(
        self,
        model: str,
        api_key: str | None,
        base_url: str | None = None,
        timeout: float = 60.0,
        system_prompt: str | None = None,
    ) -> None:
        if not api_key:
            raise ConfigurationError("AKG_LLM_KEY not configured")
        self.model = model
        self.system_prompt = system_prompt
        self._client = AsyncOpenAI(
            api_key=api_key,
            base_url=base_url,
            timeout=timeout,
            max_retries=0,
        )

    async def complete(
        self, template_id: str, prompt: str, *, temperature: float, max_tokens: int
    ) -> BackendReply:
        messages = []
        if self.system_prompt:
            messages.append({"role": "system", "content": self.system_prompt})
        messages.append({"role": "user", "content": prompt})
        try:
            response = await self._client.chat.completions.create(
                model=self.model,
                messages=messages,
                max_tokens=max_tokens,
                temperature=temperature,
            )
        except openai.RateLimitError as e:
            raise RateLimitError(f"Completion backend rate-limited: {e}") from e
        except (openai.APIConnectionError, openai.APITimeoutError) as e:
            raise BackendUnreachableError(f"Completion backend unreachable: {e}") from e
        except openai.APIStatusError as e:
            if e.status_code >= 500:
                raise BackendUnreachableError(
                    f"Completion backend error {e.status_code}", details={"status": e.status_code}
                ) from e
            raise LLMError(
                f"Completion rejected with status {e.status_code}",
                details={"status": e.status_code},
            ) from e

        text = response.choices[0].message.content or ""
        usage = response.usage
        return BackendReply(
            text=text,
            prompt_tokens=usage.prompt_tokens if usage else None,
            completion_tokens=usage.completion_tokens if usage else None,
            empty=not text,
        )


@dataclass(frozen=True)
class FixtureRoute:
    """Route rule: first rule whose template id matches and whose fragments all occur wins."""

    template_id: str
    text: str
    contains: tuple[str, ...] = ()

    def matches(self, template_id: str, prompt: str) -> bool:
        return template_id == self.template_id and all(f in prompt for f in self.contains)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FixtureRoute":
        contains = data.get("contains", ())
        if isinstance(contains, str):
            contains = (contains,)
        return cls(template_id=data["template_id"], text=data["text"], contains=tuple(contains))


@dataclass
class MockBackend:
    """
    Fixture-backed backend; output is a pure function of (template id, prompt).

    Lookup order: in-memory registrations, ``<fixtures>/<digest>.txt``,
    then the rules in ``<fixtures>/routes.json``. Strict mode raises
    FixtureMissingError naming the digest; lenient mode returns an empty
    completion flagged ``empty``.
    """

    fixtures_dir: Path | None = None
    strict: bool = True
    routes: list[FixtureRoute] = field(default_factory=list)
    backend_id: str = "mock"
    _registered: dict[str, str] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.fixtures_dir is not None:
            self.fixtures_dir = Path(self.fixtures_dir)
            routes_path = self.fixtures_dir / ROUTES_FILE
            if routes_path.is_file():
                try:
                    raw = json.loads(routes_path.read_text(encoding="utf-8"))
                except json.JSONDecodeError as e:
                    raise ConfigurationError(f"Invalid fixture routes {routes_path}: {e}") from e
                self.routes.extend(FixtureRoute.from_dict(item) for item in raw)

    def register(self, template_id: str, prompt: str, text: str) -> str:
        digest = prompt_digest(template_id, prompt)
        self._registered[digest] = text
        return digest

    def add_route(self, template_id: str, text: str, *contains: str) -> None:
        self.routes.append(FixtureRoute(template_id, text, tuple(contains)))

    def lookup(self, template_id: str, prompt: str) -> str | None:
        digest = prompt_digest(template_id, prompt)
        if digest in self._registered:
            return self._registered[digest]
        if self.fixtures_dir is not None:
            path = self.fixtures_dir / f"{digest}.txt"
            if path.is_file():
                return path.read_text(encoding="utf-8")
        for route in self.routes:
            if route.matches(template_id, prompt):
                return route.text
        return None

    async def complete(
        self, template_id: str, prompt: str, *, temperature: float, max_tokens: int
    ) -> BackendReply:
        text = self.lookup(template_id, prompt)
        if text is None:
            digest = prompt_digest(template_id, prompt)
            if self.strict:
                raise FixtureMissingError(
                    f"No fixture for template '{template_id}' with digest {digest}",
                    details={"template_id": template_id, "digest": digest},
                )
            logger.warning("fixture_missing", template_id=template_id, digest=digest[:12])
            return BackendReply(text="", empty=True)
        return BackendReply(text=text, empty=not text)


ScriptItem = str | Exception
Responder = Callable[[str, str], ScriptItem]


class ScriptedBackend:
    """Replays a script of texts and exceptions, or delegates to a responder."""

    backend_id = "scripted"

    def __init__(self, script: Sequence[ScriptItem] | Responder) -> None:
        self._responder: Responder | None = script if callable(script) else None
        self._script: list[ScriptItem] = [] if callable(script) else list(script)
        self.calls: list[tuple[str, str]] = []

    async def complete(
        self, template_id: str, prompt: str, *, temperature: float, max_tokens: int
    ) -> BackendReply:
        self.calls.append((template_id, prompt))
        if self._responder is not None:
            item = self._responder(template_id, prompt)
        elif self._script:
            item = self._script.pop(0)
        else:
            raise LLMError("Scripted backend exhausted", details={"template_id": template_id})
        if isinstance(item, Exception):
            raise item
        return BackendReply(text=item, empty=not item)


def build_backend(settings: Settings) -> OpenAIBackend | MockBackend:
    if settings.LLM_BACKEND == "openai":
        return OpenAIBackend(
            model=settings.AKG_LLM_MODEL,
            api_key=settings.AKG_LLM_KEY,
            base_url=settings.AKG_LLM_URL,
            timeout=settings.LLM_TIMEOUT,
        )
    fixtures = Path(settings.LLM_FIXTURES_DIR) if settings.LLM_FIXTURES_DIR else None
    return MockBackend(fixtures_dir=fixtures, strict=settings.LLM_STRICT)


def build_gateway(settings: Settings, backend: Any = None) -> LLMGateway:
    """Gateway wired from settings; ``backend`` overrides the configured one."""
    return LLMGateway(
        backend or build_backend(settings),
        max_attempts=settings.LLM_MAX_ATTEMPTS,
        backoff_initial=settings.LLM_BACKOFF_INITIAL,
        backoff_max=settings.LLM_BACKOFF_MAX,
        parallelism=settings.LLM_PARALLELISM,
        temperature=settings.LLM_TEMPERATURE,
        max_tokens=settings.LLM_MAX_TOKENS,
    )
