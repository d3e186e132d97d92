"""Retrieval: entity matching, sub-graph assembly and communities."""

from app.retrieval.communities import Community, form_communities
from app.retrieval.engine import (
    ElementMatch,
    MatchResult,
    SubGraphBundle,
    TitleElements,
    match_entities,
    retrieve_subgraph,
)

__all__ = [
    "Community",
    "form_communities",
    "ElementMatch",
    "MatchResult",
    "SubGraphBundle",
    "TitleElements",
    "match_entities",
    "retrieve_subgraph",
]
