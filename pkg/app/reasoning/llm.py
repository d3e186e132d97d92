"""
LLM Gateway

Uniform completion client over pluggable backends: prompt rendering,
bounded parallelism, retries with exponential backoff and a totally
ordered call ledger.
"""

import asyncio
import threading
import time
import weakref
from collections.abc import Awaitable, Callable, Iterator, Mapping
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import asdict, dataclass, field
from typing import Any, Protocol

from tenacity import (
    AsyncRetrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from app.core.exceptions import BackendUnreachableError, RateLimitError
from app.reasoning.prompts import PromptCatalog, prompt_catalog
from app.utils import get_logger, sha256_hex

logger = get_logger(__name__)


def prompt_digest(template_id: str, prompt: str) -> str:
    """Fixture key: SHA-256 of template id, a newline, then the rendered prompt."""
    return sha256_hex(f"{template_id}\n{prompt}")


# =============================================================================
# REQUEST / RESULT STRUCTURES
# =============================================================================


@dataclass(frozen=True)
class CompletionRequest:
    template_id: str
    slots: Mapping[str, Any] = field(default_factory=dict)
    max_tokens: int | None = None
    temperature: float | None = None


@dataclass
class BackendReply:
    """Raw backend output before gateway bookkeeping."""

    text: str
    prompt_tokens: int | None = None
    completion_tokens: int | None = None
    empty: bool = False


@dataclass
class CompletionResult:
    text: str
    backend_id: str
    template_id: str
    prompt: str
    prompt_digest: str
    temperature: float
    max_tokens: int
    latency_s: float
    attempts: int
    prompt_tokens: int | None = None
    completion_tokens: int | None = None
    empty: bool = False

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data.pop("prompt")
        return data


class CompletionBackend(Protocol):
    backend_id: str

    async def complete(
        self, template_id: str, prompt: str, *, temperature: float, max_tokens: int
    ) -> BackendReply: ...


# =============================================================================
# CALL LEDGER
# =============================================================================


@dataclass(frozen=True)
class LedgerEntry:
    template_id: str
    prompt_digest: str
    backend_id: str

    def to_dict(self) -> dict[str, str]:
        return asdict(self)


class CallLedger:
    """Thread-safe, append-only record of dispatched completions."""

    def __init__(self, enabled: bool = True) -> None:
        self.enabled = enabled
        self._entries: list[LedgerEntry] = []
        self._lock = threading.Lock()

    def record(self, entry: LedgerEntry) -> None:
        if not self.enabled:
            return
        with self._lock:
            self._entries.append(entry)

    def entries(self) -> list[LedgerEntry]:
        with self._lock:
            return list(self._entries)

    def template_ids(self) -> list[str]:
        return [entry.template_id for entry in self.entries()]

    def reset(self) -> None:
        with self._lock:
            self._entries.clear()

    def summary(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for entry in self.entries():
            counts[entry.template_id] = counts.get(entry.template_id, 0) + 1
        return counts

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


_scoped_ledgers: ContextVar[tuple[CallLedger, ...]] = ContextVar("akg_scoped_ledgers", default=())


# =============================================================================
# GATEWAY
# =============================================================================


class LLMGateway:
    """
    Completion gateway shared by extraction, curation and QA.

    Ledger entries are appended when a call is dispatched, before any await,
    so concurrently gathered calls are recorded in submission order.
    """

    def __init__(
        self,
        backend: CompletionBackend,
        *,
        max_attempts: int = 3,
        backoff_initial: float = 1.0,
        backoff_max: float = 4.0,
        parallelism: int = 4,
        temperature: float = 0.0,
        max_tokens: int = 1024,
        catalog: PromptCatalog | None = None,
        sleep: Callable[[float], Awaitable[None]] = asyncio.sleep,
    ) -> None:
        self.backend = backend
        self.max_attempts = max(1, max_attempts)
        self.backoff_initial = backoff_initial
        self.backoff_max = backoff_max
        self.parallelism = max(1, parallelism)
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.catalog = catalog or prompt_catalog
        self.ledger = CallLedger()
        self._sleep = sleep
        self._semaphores: weakref.WeakKeyDictionary[
            asyncio.AbstractEventLoop, asyncio.Semaphore
        ] = weakref.WeakKeyDictionary()
        self._semaphore_lock = threading.Lock()

    @property
    def backend_id(self) -> str:
        return self.backend.backend_id

    def _semaphore(self) -> asyncio.Semaphore:
        loop = asyncio.get_running_loop()
        with self._semaphore_lock:
            semaphore = self._semaphores.get(loop)
            if semaphore is None:
                semaphore = asyncio.Semaphore(self.parallelism)
                self._semaphores[loop] = semaphore
            return semaphore

    def render(self, request: CompletionRequest) -> str:
        return self.catalog.render(request.template_id, request.slots)

    async def complete(self, request: CompletionRequest) -> CompletionResult:
        """
        Render and complete one request.

        Args:
            request: Template id, slot bindings and decoding parameters

        Returns:
            CompletionResult with text, backend id, latency and attempts

        Raises:
            BackendUnreachableError / RateLimitError: After the retry budget
            FixtureMissingError: Strict mock without a matching fixture
        """
        prompt = self.render(request)
        digest = prompt_digest(request.template_id, prompt)
        temperature = self.temperature if request.temperature is None else request.temperature
        max_tokens = self.max_tokens if request.max_tokens is None else request.max_tokens

        entry = LedgerEntry(request.template_id, digest, self.backend_id)
        self.ledger.record(entry)
        for scoped in _scoped_ledgers.get():
            scoped.record(entry)

        start = time.perf_counter()
        attempts = 0
        retrying = AsyncRetrying(
            stop=stop_after_attempt(self.max_attempts),
            wait=wait_exponential(
                multiplier=self.backoff_initial, min=self.backoff_initial, max=self.backoff_max
            ),
            retry=retry_if_exception_type((BackendUnreachableError, RateLimitError)),
            sleep=self._sleep,
            reraise=True,
        )
        async with self._semaphore():
            async for attempt in retrying:
                with attempt:
                    attempts = attempt.retry_state.attempt_number
                    if attempts > 1:
                        logger.warning(
                            "completion_retry",
                            template_id=request.template_id,
                            digest=digest[:12],
                            attempt=attempts,
                        )
                    reply = await self.backend.complete(
                        request.template_id,
                        prompt,
                        temperature=temperature,
                        max_tokens=max_tokens,
                    )
        latency = time.perf_counter() - start

        logger.info(
            "completion_finished",
            template_id=request.template_id,
            digest=digest[:12],
            backend=self.backend_id,
            attempts=attempts,
            latency_ms=round(latency * 1000, 2),
        )
        return CompletionResult(
            text=reply.text,
            backend_id=self.backend_id,
            template_id=request.template_id,
            prompt=prompt,
            prompt_digest=digest,
            temperature=temperature,
            max_tokens=max_tokens,
            latency_s=latency,
            attempts=attempts,
            prompt_tokens=reply.prompt_tokens,
            completion_tokens=reply.completion_tokens,
            empty=reply.empty or not reply.text,
        )

    async def complete_text(self, template_id: str, **slots: Any) -> CompletionResult:
        return await self.complete(CompletionRequest(template_id, slots))

    def call_ledger(self) -> list[LedgerEntry]:
        """Chronological record of completion calls since the last reset."""
        return self.ledger.entries()

    def reset_ledger(self) -> None:
        self.ledger.reset()

    @contextmanager
    def recording(self) -> Iterator[CallLedger]:
        """Capture the calls made in the current context (and tasks it spawns)."""
        scoped = CallLedger()
        token = _scoped_ledgers.set(_scoped_ledgers.get() + (scoped,))
        try:
            yield scoped
        finally:
            _scoped_ledgers.reset(token)
