"""Sub-graph communities: connected components of retrieved titles over inter-paper edges."""

from dataclasses import dataclass, field
from typing import Any

import networkx as nx

from app.graph.models import Triple
from app.graph.store import GraphStore
from app.retrieval.engine import SubGraphBundle
from app.utils import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Community:
    title_ids: tuple[int, ...]
    internal_edges: tuple[Triple, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.title_ids)

    def to_dict(self) -> dict[str, Any]:
        return {
            "title_ids": list(self.title_ids),
            "internal_edges": [edge.to_dict() for edge in self.internal_edges],
        }


def form_communities(bundle: SubGraphBundle, store: GraphStore) -> list[Community]:
    """
    Partition the bundle's titles into communities.

    Edges are the inter-paper triples among bundle titles only, both relation
    kinds, taken as undirected. Communities are ordered by smallest title id.
    """
    titles = bundle.title_ids
    edges = store.inter_paper_edges(titles)
    graph = nx.Graph()
    graph.add_nodes_from(titles)
    graph.add_edges_from((edge.subject_id, edge.object_id) for edge in edges)

    communities = []
    for component in nx.connected_components(graph):
        members = tuple(sorted(component))
        internal = tuple(e for e in edges if e.subject_id in component)
        communities.append(Community(members, internal))
    communities.sort(key=lambda c: c.title_ids[0])
    logger.debug(
        "community_formed",
        titles=len(titles),
        edges=len(edges),
        communities=len(communities),
    )
    return communities
