"""
Sub-graph Retrieval

Maps a question's relevant elements onto graph entities and assembles the
Title-anchored sub-graph the answer is built from. Path resolution uses
exact lookups and adjacency walks only: each matched entity walks its
canonical hops to Title, and each Title walks to the target kind.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from app.core.exceptions import NoMatchesError
from app.embedding import EmbeddingProvider
from app.graph.store import GraphStore
from app.ontology import EntityKind, PathSpec, from_title, to_title
from app.reasoning.intent import Intent, RelevantElement
from app.utils import get_logger, truncate_text

logger = get_logger(__name__)

MATCH_EXACT = "exact"
MATCH_NORMALIZED = "normalized"
MATCH_EMBEDDING = "embedding"


# =============================================================================
# ENTITY MATCHING
# =============================================================================


@dataclass
class ElementMatch:
    element: RelevantElement
    entity_ids: list[int]
    method: str

    def to_dict(self) -> dict[str, Any]:
        return {**self.element.to_dict(), "entity_ids": self.entity_ids, "method": self.method}


@dataclass
class MatchResult:
    matches: list[ElementMatch] = field(default_factory=list)
    unmatched: list[RelevantElement] = field(default_factory=list)

    @property
    def entity_ids(self) -> list[int]:
        """Matched ids in first-seen order."""
        return list(dict.fromkeys(i for match in self.matches for i in match.entity_ids))

    def to_dict(self) -> dict[str, Any]:
        return {
            "matches": [m.to_dict() for m in self.matches],
            "unmatched": [e.to_dict() for e in self.unmatched],
        }


def _embedding_match(
    element: RelevantElement,
    store: GraphStore,
    embedder: EmbeddingProvider,
    threshold: float,
) -> list[int]:
    records = list(store.iter_entities(element.kind))
    if not records:
        return []
    vectors = embedder.embed([element.surface, *(r.surface for r in records)])
    matrix = np.vstack([v.as_array() for v in vectors])
    norms = np.linalg.norm(matrix, axis=1)
    norms[norms == 0] = 1.0
    similarities = (matrix[1:] @ matrix[0]) / (norms[1:] * norms[0])
    return [r.entity_id for r, s in zip(records, similarities, strict=True) if s >= threshold]


def match_entities(
    intent: Intent,
    store: GraphStore,
    embedder: EmbeddingProvider | None = None,
    threshold: float = 0.85,
) -> MatchResult:
    """
    Entities of each element's declared kind whose surface matches.

    An exact (kind, surface) hit wins; otherwise normalized surfaces are
    compared through the store index. With an embedder, elements that still
    miss fall back to cosine similarity at or above ``threshold``.

    Raises:
        NoMatchesError: When no element matches anything
    """
    result = MatchResult()
    for element in intent.relevant_elements:
        exact = store.find_entity(element.kind, element.surface)
        if exact is not None:
            result.matches.append(ElementMatch(element, [exact], MATCH_EXACT))
            continue
        normalized = store.lookup_normalized(element.kind, element.surface)
        if normalized:
            result.matches.append(ElementMatch(element, normalized, MATCH_NORMALIZED))
            continue
        if embedder is not None:
            similar = _embedding_match(element, store, embedder, threshold)
            if similar:
                result.matches.append(ElementMatch(element, similar, MATCH_EMBEDDING))
                continue
        result.unmatched.append(element)

    if not result.matches:
        attempted = [e.to_dict() for e in intent.relevant_elements]
        raise NoMatchesError(
            "No relevant element matched a graph entity", details={"attempted": attempted}
        )
    if result.unmatched:
        logger.info("elements_unmatched", unmatched=[e.surface for e in result.unmatched])
    return result


# =============================================================================
# SUB-GRAPH
# =============================================================================


@dataclass(frozen=True)
class GraphElement:
    entity_id: int
    kind: EntityKind
    surface: str

    def line(self) -> str:
        return f"{self.kind.value.lower()}: {self.surface}"

    def to_dict(self) -> dict[str, Any]:
        return {"entity_id": self.entity_id, "kind": self.kind.value, "surface": self.surface}


@dataclass
class TitleElements:
    """A retained paper: its title, target elements and the matched sources it links to."""

    title_id: int
    title: str
    targets: list[GraphElement]
    sources: list[GraphElement] = field(default_factory=list)

    def render(self) -> str:
        lines = [f"title: {self.title}"]
        lines += [element.line() for element in self.targets]
        lines += [element.line() for element in self.sources]
        return "\n".join(dict.fromkeys(lines))

    def to_dict(self) -> dict[str, Any]:
        return {
            "title_id": self.title_id,
            "title": self.title,
            "targets": [e.to_dict() for e in self.targets],
            "sources": [e.to_dict() for e in self.sources],
        }


@dataclass
class SubGraphBundle:
    target_kind: EntityKind
    matched_source_ids: list[int]
    titles: dict[int, TitleElements] = field(default_factory=dict)
    introductions: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.titles)

    @property
    def title_ids(self) -> list[int]:
        return sorted(self.titles)

    def render_introductions(self) -> str:
        return "\n".join(self.introductions)

    def render_elements(
        self, title_ids: Sequence[int] | None = None, max_chars: int | None = None
    ) -> tuple[str, bool]:
        """
        Element blocks of the given titles, blank-line separated.

        With ``max_chars`` each block is cut to an even share of the budget.

        Returns:
            (text, whether any block was truncated)
        """
        ids = self.title_ids if title_ids is None else list(title_ids)
        blocks = [self.titles[i].render() for i in ids]
        if max_chars is None or not blocks:
            return "\n\n".join(blocks), False
        separators = 2 * (len(blocks) - 1)
        share = max(1, (max_chars - separators) // len(blocks))
        cut = [truncate_text(block, share) for block in blocks]
        truncated = any(len(a) != len(b) for a, b in zip(blocks, cut, strict=True))
        return "\n\n".join(cut), truncated

    def to_dict(self) -> dict[str, Any]:
        return {
            "target_kind": self.target_kind.value,
            "matched_source_ids": self.matched_source_ids,
            "titles": [self.titles[i].to_dict() for i in self.title_ids],
            "introductions": self.introductions,
        }


def introductions_for(kinds: Iterable[EntityKind]) -> list[str]:
    """Glossary lines for Title followed by the given kinds, once each."""
    ordered = dict.fromkeys([EntityKind.TITLE, *kinds])
    return [kind.glossary_line for kind in ordered]


def _element(store: GraphStore, entity_id: int) -> GraphElement:
    record = store.entity(entity_id)
    return GraphElement(record.entity_id, record.kind, record.surface)


def retrieve_subgraph(
    matched_ids: Sequence[int], target_kind: EntityKind, store: GraphStore
) -> SubGraphBundle:
    """
    Titles reachable from the matched entities, each with its target elements.

    Titles without any target element are dropped; an empty bundle is valid.
    """
    bundle = SubGraphBundle(target_kind, list(matched_ids))
    to_target = PathSpec(EntityKind.TITLE, from_title(target_kind))
    sources_by_title: dict[int, list[GraphElement]] = {}
    for entity_id in matched_ids:
        source = _element(store, entity_id)
        path = PathSpec(source.kind, to_title(source.kind))
        for title_id in store.walk_path(entity_id, path):
            sources_by_title.setdefault(title_id, [])
            if source.kind is not EntityKind.TITLE:
                sources_by_title[title_id].append(source)

    for title_id in sorted(sources_by_title):
        targets = [_element(store, i) for i in store.walk_path(title_id, to_target)]
        if not targets:
            continue
        title = store.entity(title_id).surface
        bundle.titles[title_id] = TitleElements(
            title_id, title, targets, list(dict.fromkeys(sources_by_title[title_id]))
        )

    matched_kinds = [store.entity(i).kind for i in matched_ids]
    bundle.introductions = introductions_for([target_kind, *matched_kinds])
    logger.debug(
        "subgraph_retrieved",
        matched=len(matched_ids),
        titles=len(bundle),
        target_kind=target_kind.value,
    )
    return bundle
