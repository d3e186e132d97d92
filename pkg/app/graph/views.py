"""Read-only views of entities and papers, shared by the CLI and the service."""

from typing import Any

from app.core.exceptions import UnknownEntityError
from app.graph.store import GraphStore
from app.ontology import EntityKind, canonical_path


def edge_view(store: GraphStore, entity_id: int) -> list[dict[str, Any]]:
    """Triples touching an entity, each with both endpoint surfaces."""
    return [
        {
            **triple.to_dict(),
            "subject": store.entity(triple.subject_id).surface,
            "object": store.entity(triple.object_id).surface,
        }
        for triple in store.edges_of(entity_id)
    ]


def entity_view(store: GraphStore, entity_id: int) -> dict[str, Any]:
    return {**store.entity(entity_id).to_dict(), "edges": edge_view(store, entity_id)}


def paper_view(store: GraphStore, corpus_id: str) -> dict[str, Any]:
    """
    A paper's Title and every element reachable from it by a canonical path.

    Titles linked by inter-paper relations are listed under ``Title``.

    Raises:
        UnknownEntityError: If no Title carries this corpus id
    """
    title_id = store.title_for_paper(corpus_id)
    if title_id is None:
        raise UnknownEntityError(
            f"No paper with corpus id {corpus_id!r}", details={"corpus_id": corpus_id}
        )

    elements: dict[str, list[dict[str, Any]]] = {}
    for kind in EntityKind:
        if kind is EntityKind.TITLE:
            ids = sorted(
                {
                    t.object_id if t.subject_id == title_id else t.subject_id
                    for t in store.edges_of(title_id)
                    if t.relation.is_inter_paper
                }
            )
        else:
            ids = store.walk_path(title_id, canonical_path(EntityKind.TITLE, kind))
        if ids:
            elements[kind.value] = [store.entity(i).to_dict() for i in ids]

    return {
        "corpus_id": corpus_id,
        "title": store.entity(title_id).to_dict(),
        "elements": elements,
        "edges": edge_view(store, title_id),
    }
