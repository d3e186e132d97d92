"""Extraction data structures and the candidate dump format."""

import dataclasses
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, NamedTuple

from app.core.exceptions import CorpusParseError
from app.ontology import EntityKind, RelationKind


class EntityRef(NamedTuple):
    kind: EntityKind
    surface: str

    def to_list(self) -> list[str]:
        return [self.kind.value, self.surface]

    @classmethod
    def from_list(cls, data: list[str]) -> "EntityRef":
        return cls(EntityKind(data[0]), data[1])


@dataclass(frozen=True)
class EntityCandidate:
    """An extracted entity with its origin; ``prompt_digest`` is None for metadata."""

    kind: EntityKind
    surface: str
    corpus_id: str
    stage: str
    prompt_digest: str | None = None

    @property
    def ref(self) -> EntityRef:
        return EntityRef(self.kind, self.surface)


@dataclass(frozen=True)
class TripleCandidate:
    subject: EntityRef
    relation: RelationKind
    object: EntityRef
    corpus_id: str
    stage: str


@dataclass(frozen=True)
class StageFailure:
    corpus_id: str
    stage: str
    code: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return asdict(self)


@dataclass(frozen=True)
class PromptRecord:
    corpus_id: str
    stage: str
    template_id: str
    prompt_digest: str
    prompt: str


@dataclass
class ExtractedElements:
    """Paper elements; absent answers stay None, keywords hold 0-5 entries."""

    field: str | None = None
    keywords: list[str] = dataclasses.field(default_factory=list)
    problem: str | None = None
    method: str | None = None
    model: str | None = None
    task: str | None = None
    innovation: str | None = None
    results: list[tuple[str, str, str]] = dataclasses.field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["results"] = [list(item) for item in self.results]
        return data


class CitationRelation(str, Enum):
    DIRECT_USE = "DirectUse"
    TASK_RELATED = "TaskRelated"
    UNRELATED = "Unrelated"

    @property
    def relation(self) -> RelationKind | None:
        return {
            CitationRelation.DIRECT_USE: RelationKind.DIRECT_USE,
            CitationRelation.TASK_RELATED: RelationKind.TASK_RELATED,
        }.get(self)


@dataclass(frozen=True)
class CitationLabel:
    label: CitationRelation
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")


@dataclass
class PaperExtraction:
    corpus_id: str
    elements: ExtractedElements = field(default_factory=ExtractedElements)
    entities: list[EntityCandidate] = field(default_factory=list)
    triples: list[TripleCandidate] = field(default_factory=list)
    inter_paper: list[TripleCandidate] = field(default_factory=list)
    failures: list[StageFailure] = field(default_factory=list)
    prompts: list[PromptRecord] = field(default_factory=list)

    def add_entity(
        self, kind: EntityKind, surface: str, stage: str, prompt_digest: str | None = None
    ) -> EntityRef:
        candidate = EntityCandidate(kind, surface, self.corpus_id, stage, prompt_digest)
        if all(existing.ref != candidate.ref for existing in self.entities):
            self.entities.append(candidate)
        return candidate.ref

    def add_triple(
        self, subject: EntityRef, relation: RelationKind, obj: EntityRef, stage: str
    ) -> None:
        triple = TripleCandidate(subject, relation, obj, self.corpus_id, stage)
        target = self.inter_paper if relation.is_inter_paper else self.triples
        if triple not in target:
            target.append(triple)


@dataclass
class ExtractionResult:
    """Per-paper extractions in corpus order."""

    papers: list[PaperExtraction] = field(default_factory=list)

    @property
    def entities(self) -> list[EntityCandidate]:
        return [e for paper in self.papers for e in paper.entities]

    @property
    def triples(self) -> list[TripleCandidate]:
        return [t for paper in self.papers for t in paper.triples]

    @property
    def inter_paper(self) -> list[TripleCandidate]:
        return [t for paper in self.papers for t in paper.inter_paper]

    @property
    def failures(self) -> list[StageFailure]:
        return [f for paper in self.papers for f in paper.failures]

    def prompt_index(self) -> dict[str, PromptRecord]:
        return {p.prompt_digest: p for paper in self.papers for p in paper.prompts}

    def to_records(self) -> list[dict[str, Any]]:
        """Audit dump: entity, triple, prompt and failure records, paper by paper."""
        records: list[dict[str, Any]] = []
        for paper in self.papers:
            for entity in paper.entities:
                records.append(
                    {
                        "record": "entity",
                        "corpus_id": entity.corpus_id,
                        "stage": entity.stage,
                        "kind": entity.kind.value,
                        "surface": entity.surface,
                        "prompt_digest": entity.prompt_digest,
                    }
                )
            for triple in [*paper.triples, *paper.inter_paper]:
                records.append(
                    {
                        "record": "triple",
                        "corpus_id": triple.corpus_id,
                        "stage": triple.stage,
                        "subject": triple.subject.to_list(),
                        "relation": triple.relation.value,
                        "object": triple.object.to_list(),
                    }
                )
            for prompt in paper.prompts:
                records.append(
                    {
                        "record": "prompt",
                        "corpus_id": prompt.corpus_id,
                        "stage": prompt.stage,
                        "template_id": prompt.template_id,
                        "prompt_digest": prompt.prompt_digest,
                        "prompt": prompt.prompt,
                    }
                )
            for failure in paper.failures:
                records.append({"record": "failure", **failure.to_dict()})
        return records

    @classmethod
    def from_records(cls, records: list[dict[str, Any]]) -> "ExtractionResult":
        """
        Rebuild a result from a candidate dump.

        Relation names may be display names or aliases ("date", "direct use").

        Raises:
            CorpusParseError: On an unknown record type or malformed record
        """
        papers: dict[str, PaperExtraction] = {}

        def paper(corpus_id: str) -> PaperExtraction:
            if corpus_id not in papers:
                papers[corpus_id] = PaperExtraction(corpus_id)
            return papers[corpus_id]

        for position, record in enumerate(records, start=1):
            try:
                kind = record["record"]
                current = paper(record["corpus_id"])
                stage = record.get("stage", "import")
                if kind == "entity":
                    current.add_entity(
                        EntityKind(record["kind"]),
                        record["surface"],
                        stage,
                        record.get("prompt_digest"),
                    )
                elif kind == "triple":
                    current.add_triple(
                        EntityRef.from_list(record["subject"]),
                        RelationKind.parse(record["relation"]),
                        EntityRef.from_list(record["object"]),
                        stage,
                    )
                elif kind == "prompt":
                    current.prompts.append(
                        PromptRecord(
                            current.corpus_id,
                            stage,
                            record["template_id"],
                            record["prompt_digest"],
                            record["prompt"],
                        )
                    )
                elif kind == "failure":
                    current.failures.append(
                        StageFailure(current.corpus_id, stage, record["code"], record["message"])
                    )
                else:
                    raise ValueError(f"unknown record type {kind!r}")
            except (KeyError, ValueError, TypeError, IndexError) as e:
                raise CorpusParseError(
                    f"Malformed candidate record {position}: {e}", details={"record": position}
                ) from e
        return cls(list(papers.values()))
