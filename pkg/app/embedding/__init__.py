"""Embedding module initialization."""

from app.embedding.embedder import (
    EmbeddingProvider,
    EmbeddingVector,
    HashingEmbedder,
    RemoteEmbedder,
    build_embedder,
)

__all__ = [
    "EmbeddingProvider",
    "EmbeddingVector",
    "HashingEmbedder",
    "RemoteEmbedder",
    "build_embedder",
]
