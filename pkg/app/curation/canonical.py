"""
Entity Disambiguation

Clusters the surfaces of Task, Dataset and Metric entities, picks the most
frequent surface of each cluster as its canonical representative and
renames every member graph-wide. Canonical maps are written as one
``<Kind>.tsv`` file per kind (surface, tab, canonical) and load back as
manual overrides.
"""

import asyncio
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from app.core.config import Settings
from app.core.exceptions import (
    KindMismatchError,
    KnowledgeGraphError,
    MissingFrequencyError,
)
from app.curation.clustering import ClusteringProblem, as_matrix, kmeans, select_k
from app.embedding import EmbeddingProvider
from app.extraction.parsing import parse_canonical_choice
from app.graph.snapshot import escape_field, unescape_field
from app.graph.store import GraphStore
from app.ontology import EntityKind
from app.ontology.kinds import DISAMBIGUATION_KINDS
from app.reasoning.llm import CompletionRequest, LLMGateway
from app.reasoning.prompts import CANONICAL_EXTENSION
from app.reasoning.structured import complete_structured
from app.utils import atomic_write_text, get_logger

logger = get_logger(__name__)

# Candidates offered to the extension prompt, nearest first.
EXTENSION_CANDIDATES = 10


# =============================================================================
# CANONICAL MAP
# =============================================================================


class CanonicalMap:
    """
    surface -> canonical surface for one disambiguated kind.

    Chains are resolved on insert so that every canonical string maps to
    itself and ``canonical_of`` is idempotent.
    """

    def __init__(self, kind: EntityKind, mapping: Mapping[str, str] | None = None) -> None:
        if kind not in DISAMBIGUATION_KINDS:
            raise KindMismatchError(
                f"{kind.value} entities are not disambiguated",
                details={"kind": kind.value},
            )
        self.kind = kind
        self._map: dict[str, str] = {}
        for surface, canonical in (mapping or {}).items():
            self.add(surface, canonical)

    def canonical_of(self, surface: str) -> str:
        return self._map.get(surface, surface)

    def add(self, surface: str, canonical: str) -> None:
        canonical = self.canonical_of(canonical)
        if canonical == surface:
            self._map.pop(surface, None)
            return
        self._map[surface] = canonical
        for key, value in self._map.items():
            if value == surface:
                self._map[key] = canonical

    def merge(self, overrides: "CanonicalMap") -> "CanonicalMap":
        """Apply ``overrides`` on top of this map; overrides win."""
        if overrides.kind is not self.kind:
            raise KindMismatchError(
                f"Cannot merge a {overrides.kind.value} map into a {self.kind.value} map"
            )
        for surface, canonical in overrides.items():
            self.add(surface, canonical)
        return self

    def items(self) -> Iterator[tuple[str, str]]:
        return iter(sorted(self._map.items()))

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, surface: object) -> bool:
        return surface in self._map

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CanonicalMap):
            return NotImplemented
        return self.kind is other.kind and self._map == other._map

    def to_dict(self) -> dict[str, str]:
        return dict(self.items())

    # =========================================================================
    # TSV
    # =========================================================================

    def to_tsv(self) -> str:
        return "".join(
            f"{escape_field(surface)}\t{escape_field(canonical)}\n"
            for surface, canonical in self.items()
        )

    @classmethod
    def from_tsv(cls, kind: EntityKind, text: str) -> "CanonicalMap":
        cmap = cls(kind)
        for line_number, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValueError(f"{kind.value}.tsv line {line_number}: expected 2 columns")
            cmap.add(unescape_field(fields[0]), unescape_field(fields[1]))
        return cmap

    def save(self, directory: str | Path) -> Path:
        path = Path(directory) / f"{self.kind.value}.tsv"
        path.parent.mkdir(parents=True, exist_ok=True)
        atomic_write_text(path, self.to_tsv())
        return path


def load_maps(directory: str | Path) -> dict[EntityKind, CanonicalMap]:
    """Every ``<Kind>.tsv`` present in ``directory``."""
    maps: dict[EntityKind, CanonicalMap] = {}
    for kind in DISAMBIGUATION_KINDS:
        path = Path(directory) / f"{kind.value}.tsv"
        if path.is_file():
            maps[kind] = CanonicalMap.from_tsv(kind, path.read_text(encoding="utf-8"))
    return maps


def choose_representatives(
    kind: EntityKind,
    clusters: Iterable[Sequence[str]],
    frequencies: Mapping[str, int],
) -> CanonicalMap:
    """
    The most frequent surface of each cluster becomes its canonical form;
    ties go to the shortest, then the code-point smallest surface.

    Raises:
        MissingFrequencyError: If a clustered surface has no frequency
    """
    cmap = CanonicalMap(kind)
    for members in clusters:
        if not members:
            continue
        missing = [surface for surface in members if surface not in frequencies]
        if missing:
            raise MissingFrequencyError(
                f"No frequency for {len(missing)} clustered surface(s)",
                details={"surfaces": sorted(missing)},
            )
        representative = min(members, key=lambda s: (-frequencies[s], len(s), s))
        for surface in members:
            cmap.add(surface, representative)
    return cmap


# =============================================================================
# PROPAGATION
# =============================================================================


@dataclass
class PropagationReport:
    kind: str
    renamed: int = 0
    merged: int = 0
    triples_collapsed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "renamed": self.renamed,
            "merged": self.merged,
            "triples_collapsed": self.triples_collapsed,
        }


def propagate_canonicalization(store: GraphStore, cmap: CanonicalMap) -> PropagationReport:
    """
    Rename every entity of the map's kind to its canonical surface.

    Entities that land on an existing surface are merged into it and their
    duplicate triples collapse. Applying the same map twice is a no-op.
    """
    report = PropagationReport(cmap.kind.value)
    if not len(cmap):
        return report
    for record in list(store.iter_entities(cmap.kind)):
        if not store.has_entity(record.entity_id):
            continue
        canonical = cmap.canonical_of(record.surface)
        if canonical == record.surface:
            continue
        before = store.triple_count
        new_id = store.rename_entity(record.entity_id, canonical)
        if new_id == record.entity_id:
            report.renamed += 1
        else:
            report.merged += 1
            report.triples_collapsed += before - store.triple_count
    logger.info("canonicalization_propagated", **report.to_dict())
    return report


# =============================================================================
# DISAMBIGUATION
# =============================================================================


@dataclass(frozen=True)
class DisambiguationParams:
    sample_cap: int = 10_000
    k: int | None = None
    k_min: int = 2
    k_max: int = 12
    seed: int = 13
    max_iterations: int = 100
    n_init: int = 10
    accept_distance: float = 0.25
    llm_assist: bool = False
    max_reasks: int = 2

    @classmethod
    def from_settings(cls, settings: Settings) -> "DisambiguationParams":
        return cls(
            sample_cap=settings.CLUSTER_SAMPLE_CAP,
            k=settings.CLUSTER_K,
            k_min=settings.CLUSTER_K_MIN,
            k_max=settings.CLUSTER_K_MAX,
            seed=settings.CLUSTER_SEED,
            max_iterations=settings.CLUSTER_MAX_ITER,
            n_init=settings.CLUSTER_N_INIT,
            accept_distance=settings.CLUSTER_ACCEPT_DISTANCE,
            llm_assist=settings.CLUSTER_LLM_ASSIST,
            max_reasks=settings.EXTRACTION_MAX_REASKS,
        )


@dataclass
class KindDisambiguation:
    kind: str
    surfaces: int = 0
    sampled: int = 0
    k: int = 0
    objective: float = 0.0
    extended: int = 0
    assisted: int = 0
    canonical_map: dict[str, str] = field(default_factory=dict)
    propagation: PropagationReport | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "surfaces": self.surfaces,
            "sampled": self.sampled,
            "k": self.k,
            "objective": self.objective,
            "extended": self.extended,
            "assisted": self.assisted,
            "mapped": len(self.canonical_map),
            "propagation": self.propagation.to_dict() if self.propagation else None,
        }


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return matrix / np.where(norms > 0, norms, 1.0)


def _cosine_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return 1.0 - _unit_rows(points) @ _unit_rows(centroids).T


class Disambiguator:
    """Sample, embed, cluster, choose representatives, extend, propagate."""

    def __init__(
        self,
        embedder: EmbeddingProvider,
        params: DisambiguationParams | None = None,
        gateway: LLMGateway | None = None,
    ) -> None:
        self.embedder = embedder
        self.params = params or DisambiguationParams()
        self.gateway = gateway

    async def _assist(self, kind: EntityKind, surface: str, candidates: list[str]) -> str | None:
        assert self.gateway is not None
        request = CompletionRequest(
            CANONICAL_EXTENSION,
            {"kind": kind.value, "surface": surface, "candidates": "\n".join(candidates)},
        )
        try:
            result = await complete_structured(
                self.gateway,
                request,
                lambda text: parse_canonical_choice(text, candidates),
                self.params.max_reasks,
            )
        except KnowledgeGraphError as e:
            logger.warning("canonical_assist_failed", kind=kind.value, code=e.code)
            return None
        return result.value

    def _sample(self, surfaces: list[str]) -> tuple[list[str], list[str]]:
        if len(surfaces) <= self.params.sample_cap:
            return surfaces, []
        rng = np.random.default_rng(self.params.seed)
        picked = set(rng.choice(len(surfaces), self.params.sample_cap, replace=False).tolist())
        sampled = [s for i, s in enumerate(surfaces) if i in picked]
        rest = [s for i, s in enumerate(surfaces) if i not in picked]
        return sampled, rest

    async def build_map(
        self, kind: EntityKind, frequencies: Mapping[str, int]
    ) -> tuple[CanonicalMap, KindDisambiguation]:
        """Canonical map for one kind from surface frequencies."""
        params = self.params
        surfaces = sorted(frequencies)
        outcome = KindDisambiguation(kind.value, surfaces=len(surfaces))
        if len(surfaces) < 2:
            return CanonicalMap(kind), outcome

        sampled, rest = self._sample(surfaces)
        outcome.sampled = len(sampled)
        points = _unit_rows(as_matrix(self.embedder.embed(sampled)))
        k = params.k or select_k(
            points, params.k_min, params.k_max, params.seed, params.max_iterations, params.n_init
        )
        k = max(1, min(k, len(sampled)))
        clustering = kmeans(
            ClusteringProblem(points, k, params.seed, params.max_iterations, params.n_init)
        )
        outcome.k, outcome.objective = k, clustering.objective

        # Members too far from their centroid stay unmerged.
        distances = _cosine_distances(points, clustering.centroids)
        cores = [
            [sampled[i] for i in members if distances[i, c] <= params.accept_distance]
            for c, members in enumerate(clustering.clusters())
        ]
        cmap = choose_representatives(kind, cores, frequencies)
        targets = [cmap.canonical_of(core[0]) if core else None for core in cores]

        if rest:
            await self._extend(kind, rest, clustering.centroids, targets, cmap, outcome)
        outcome.canonical_map = cmap.to_dict()
        return cmap, outcome

    async def _extend(
        self,
        kind: EntityKind,
        rest: list[str],
        centroids: np.ndarray,
        targets: list[str | None],
        cmap: CanonicalMap,
        outcome: KindDisambiguation,
    ) -> None:
        """Nearest-centroid assignment of unsampled surfaces, then the optional assist."""
        rest_points = _unit_rows(as_matrix(self.embedder.embed(rest)))
        rest_distances = _cosine_distances(rest_points, centroids)
        for i, surface in enumerate(rest):
            order = rest_distances[i].argsort(kind="stable")
            nearest = int(order[0])
            target = targets[nearest]
            if rest_distances[i, nearest] <= self.params.accept_distance and target is not None:
                if target != surface:
                    cmap.add(surface, target)
                    outcome.extended += 1
                continue
            if not self.params.llm_assist or self.gateway is None:
                continue
            candidates = list(dict.fromkeys(t for c in order if (t := targets[int(c)])))
            choice = await self._assist(kind, surface, candidates[:EXTENSION_CANDIDATES])
            if choice is not None and choice != surface:
                cmap.add(surface, choice)
                outcome.assisted += 1

    async def disambiguate(
        self,
        store: GraphStore,
        overrides: Mapping[EntityKind, CanonicalMap] | None = None,
        kinds: Sequence[EntityKind] = DISAMBIGUATION_KINDS,
    ) -> dict[EntityKind, tuple[CanonicalMap, KindDisambiguation]]:
        """
        Build and propagate a canonical map per kind.

        Frequency of a surface is the number of papers in its provenance.
        Manual overrides are applied on top of the clustering result.
        """
        results: dict[EntityKind, tuple[CanonicalMap, KindDisambiguation]] = {}
        for kind in kinds:
            frequencies = {
                record.surface: len(record.provenance) for record in store.iter_entities(kind)
            }
            cmap, outcome = await self.build_map(kind, frequencies)
            if overrides and kind in overrides:
                cmap.merge(overrides[kind])
                outcome.canonical_map = cmap.to_dict()
            outcome.propagation = propagate_canonicalization(store, cmap)
            logger.info("kind_disambiguated", **outcome.to_dict())
            results[kind] = (cmap, outcome)
        return results


async def disambiguate(
    store: GraphStore,
    embedder: EmbeddingProvider,
    params: DisambiguationParams | None = None,
    gateway: LLMGateway | None = None,
    overrides: Mapping[EntityKind, CanonicalMap] | None = None,
) -> dict[EntityKind, tuple[CanonicalMap, KindDisambiguation]]:
    return await Disambiguator(embedder, params, gateway).disambiguate(store, overrides)


def run_disambiguation(
    store: GraphStore,
    embedder: EmbeddingProvider,
    params: DisambiguationParams | None = None,
    gateway: LLMGateway | None = None,
    overrides: Mapping[EntityKind, CanonicalMap] | None = None,
) -> dict[EntityKind, tuple[CanonicalMap, KindDisambiguation]]:
    """Synchronous entry point for the CLI."""
    return asyncio.run(disambiguate(store, embedder, params, gateway, overrides))
