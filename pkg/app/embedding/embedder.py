"""
Embedding providers.

- HashingEmbedder ("mock"): case-fold the text, take character 3-grams (the
  whole string when shorter than 3), hash each gram with BLAKE2b (8-byte
  digest, big-endian) modulo the dimension, count, L2-normalize.
- RemoteEmbedder ("remote"): OpenAI-compatible ``/embeddings`` endpoint
  configured by AKG_EMB_URL / AKG_EMB_KEY / AKG_EMB_MODEL.
"""

import hashlib
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Protocol

import httpx
import numpy as np
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from app.core.config import Settings
from app.core.exceptions import (
    ConfigurationError,
    EmbeddingError,
    EmptyInputTextError,
    ProviderUnreachableError,
)
from app.utils import get_logger

logger = get_logger(__name__)

MOCK_DIMENSION = 64


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    dimension: int
    provider_id: str

    def __post_init__(self) -> None:
        if self.dimension <= 0 or len(self.values) != self.dimension:
            raise EmbeddingError(
                f"Vector has {len(self.values)} components, expected {self.dimension}"
            )
        if not all(math.isfinite(v) for v in self.values):
            raise EmbeddingError("Embedding contains non-finite components")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


class EmbeddingProvider(Protocol):
    provider_id: str
    dimension: int

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


def _check_texts(texts: Sequence[str]) -> None:
    for position, text in enumerate(texts):
        if not text or not text.strip():
            raise EmptyInputTextError(
                "Cannot embed empty text", details={"position": position}
            )


class HashingEmbedder:
    """Deterministic character 3-gram hashing embedder."""

    provider_id = "mock"

    def __init__(self, dimension: int = MOCK_DIMENSION) -> None:
        self.dimension = dimension

    @staticmethod
    def grams(text: str) -> list[str]:
        folded = text.casefold()
        if len(folded) < 3:
            return [folded]
        return [folded[i : i + 3] for i in range(len(folded) - 2)]

    def bucket(self, gram: str) -> int:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % self.dimension

    def embed_text(self, text: str) -> EmbeddingVector:
        _check_texts([text])
        counts = np.zeros(self.dimension, dtype=np.float64)
        for gram in self.grams(text):
            counts[self.bucket(gram)] += 1.0
        counts /= np.linalg.norm(counts)
        return EmbeddingVector(tuple(float(v) for v in counts), self.dimension, self.provider_id)

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        """One vector per input, order preserved."""
        _check_texts(texts)
        return [self.embed_text(text) for text in texts]


class RemoteEmbedder:
    """OpenAI-compatible embeddings over HTTP."""

    provider_id = "remote"

    def __init__(
        self,
        url: str,
        api_key: str | None,
        model: str,
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self.model = model
        self.dimension = 0
        self._client = httpx.Client(
            base_url=url.rstrip("/"), headers=headers, timeout=timeout, transport=transport
        )

    @retry(
        stop=stop_after_attempt(3),
        wait=wait_exponential(multiplier=1, max=4),
        retry=retry_if_exception_type(ProviderUnreachableError),
        reraise=True,
    )
    def _post(self, texts: list[str]) -> list[list[float]]:
        try:
            response = self._client.post("/embeddings", json={"model": self.model, "input": texts})
        except httpx.TransportError as e:
            raise ProviderUnreachableError(f"Embedding provider unreachable: {e}") from e
        if response.status_code == 429 or response.status_code >= 500:
            raise ProviderUnreachableError(
                f"Embedding provider returned {response.status_code}",
                details={"status": response.status_code},
            )
        if response.status_code >= 400:
            raise EmbeddingError(
                f"Embedding request rejected with {response.status_code}",
                details={"status": response.status_code},
            )
        data = sorted(response.json()["data"], key=lambda item: item["index"])
        return [item["embedding"] for item in data]

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        _check_texts(texts)
        if not texts:
            return []
        rows = self._post(list(texts))
        if len(rows) != len(texts):
            raise EmbeddingError(f"Provider returned {len(rows)} vectors for {len(texts)} texts")
        dimension = len(rows[0])
        if self.dimension and dimension != self.dimension:
            raise EmbeddingError(f"Provider dimension changed from {self.dimension} to {dimension}")
        self.dimension = dimension
        return [
            EmbeddingVector(tuple(float(v) for v in row), dimension, self.provider_id)
            for row in rows
        ]


def build_embedder(settings: Settings) -> HashingEmbedder | RemoteEmbedder:
    if settings.EMBEDDING_PROVIDER == "remote":
        if not settings.AKG_EMB_URL:
            raise ConfigurationError("AKG_EMB_URL not configured")
        return RemoteEmbedder(
            url=settings.AKG_EMB_URL,
            api_key=settings.AKG_EMB_KEY,
            model=settings.AKG_EMB_MODEL,
            timeout=settings.LLM_TIMEOUT,
        )
    return HashingEmbedder(settings.EMBEDDING_DIMENSION)

