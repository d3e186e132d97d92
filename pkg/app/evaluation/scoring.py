"""
Greedy-matching answer scoring.

Each candidate token is matched to its most similar reference token and
vice versa:

    P = mean_{c in candidate} max_{r in reference} sim(c, r)
    R = mean_{r in reference} max_{c in candidate} sim(c, r)
    F1 = 2PR / (P + R), 0 when P + R = 0

Tokens are Unicode words, case-folded, punctuation dropped. No baseline
rescaling is applied.
"""

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from app.core.config import Settings
from app.core.exceptions import EmptyStringError
from app.embedding import EmbeddingProvider
from app.utils import tokenize


@dataclass(frozen=True)
class ScoreTriplet:
    precision: float
    recall: float

    @property
    def f1(self) -> float:
        total = self.precision + self.recall
        return 2 * self.precision * self.recall / total if total > 0 else 0.0

    def to_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


class TokenScorer(Protocol):
    scorer_id: str

    def similarity(self, candidate: list[str], reference: list[str]) -> np.ndarray: ...


class ExactTokenScorer:
    """sim = 1 iff the case-folded tokens are equal."""

    scorer_id = "exact"

    def similarity(self, candidate: list[str], reference: list[str]) -> np.ndarray:
        return np.array(
            [[1.0 if c == r else 0.0 for r in reference] for c in candidate], dtype=np.float64
        )


class EmbeddingTokenScorer:
    """Cosine similarity of token embeddings, clipped to [0, 1]."""

    scorer_id = "embedding"

    def __init__(self, embedder: EmbeddingProvider) -> None:
        self.embedder = embedder

    def similarity(self, candidate: list[str], reference: list[str]) -> np.ndarray:
        vocabulary = sorted(set(candidate) | set(reference))
        vectors = self.embedder.embed(vocabulary)
        matrix = np.vstack([v.as_array() for v in vectors])
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        unit = matrix / np.where(norms > 0, norms, 1.0)
        index = {token: i for i, token in enumerate(vocabulary)}
        c = unit[[index[t] for t in candidate]]
        r = unit[[index[t] for t in reference]]
        cosine = np.clip(c @ r.T, 0.0, 1.0)
        equal = np.array([[a == b for b in reference] for a in candidate])
        return np.where(equal, 1.0, cosine)


def build_scorer(
    settings: Settings, embedder: EmbeddingProvider | None = None
) -> ExactTokenScorer | EmbeddingTokenScorer:
    if settings.EVAL_SCORER == "embedding" and embedder is not None:
        return EmbeddingTokenScorer(embedder)
    return ExactTokenScorer()


def score_pair(
    candidate: str, reference: str, scorer: TokenScorer | None = None
) -> ScoreTriplet:
    """
    Score a candidate answer against a reference.

    Raises:
        EmptyStringError: If either side has no tokens
    """
    candidate_tokens = tokenize(candidate or "")
    reference_tokens = tokenize(reference or "")
    for name, tokens in (("candidate", candidate_tokens), ("reference", reference_tokens)):
        if not tokens:
            raise EmptyStringError(f"The {name} answer is empty", details={"side": name})
    sim = (scorer or ExactTokenScorer()).similarity(candidate_tokens, reference_tokens)
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    return ScoreTriplet(precision, recall)
