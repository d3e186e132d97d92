"""Graph store: interning, schema-checked triples, paths and snapshots."""

from app.graph.models import (
    EntityRecord,
    GraphStats,
    IngestReport,
    InsertOutcome,
    Triple,
    render_stats,
)
from app.graph.snapshot import (
    GraphSnapshot,
    load_snapshot,
    parse_snapshot,
    save_snapshot,
    serialize_snapshot,
)
from app.graph.store import GraphStore
from app.graph.views import edge_view, entity_view, paper_view

__all__ = [
    "EntityRecord",
    "GraphStats",
    "IngestReport",
    "InsertOutcome",
    "Triple",
    "render_stats",
    "GraphSnapshot",
    "load_snapshot",
    "parse_snapshot",
    "save_snapshot",
    "serialize_snapshot",
    "GraphStore",
    "edge_view",
    "entity_view",
    "paper_view",
]
