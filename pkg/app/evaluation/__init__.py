"""Evaluation: QA datasets, greedy-matching scorers and evaluation runs."""

from app.evaluation.dataset import QAItem, load_qa_dataset
from app.evaluation.runner import (
    EvalReport,
    ItemResult,
    evaluate,
    kg_system,
    llm_only_system,
    run_eval,
)
from app.evaluation.scoring import (
    EmbeddingTokenScorer,
    ExactTokenScorer,
    ScoreTriplet,
    build_scorer,
    score_pair,
)

__all__ = [
    "QAItem",
    "load_qa_dataset",
    "EvalReport",
    "ItemResult",
    "evaluate",
    "kg_system",
    "llm_only_system",
    "run_eval",
    "EmbeddingTokenScorer",
    "ExactTokenScorer",
    "ScoreTriplet",
    "build_scorer",
    "score_pair",
]
