"""Entity and relation kinds of the academic knowledge graph."""

from enum import Enum


class EntityKind(str, Enum):
    """The 15 node types of the ontology."""

    TITLE = "Title"
    AUTHOR = "Author"
    INSTITUTION = "Institution"
    CONFERENCE = "Conference"
    DATE = "Date"
    FIELD = "Field"
    KEYWORDS = "Keywords"
    INNOVATION = "Innovation"
    METHOD = "Method"
    PROBLEM = "Problem"
    MODEL = "Model"
    TASK = "Task"
    DATASET = "Dataset"
    METRIC = "Metric"
    RESULT = "Result"

    @classmethod
    def parse(cls, name: str) -> "EntityKind":
        """Case-insensitive lookup that tolerates a plural suffix ("methods")."""
        key = name.strip().casefold()
        for kind in cls:
            plural = kind.value.casefold()
            if key in (plural, plural + "s", plural + "es") or (
                key.endswith("ies") and key[:-3] + "y" == plural
            ):
                return kind
        if key == "research field":
            return cls.FIELD
        raise ValueError(f"Unknown entity kind: {name!r}")

    @property
    def introduction(self) -> str:
        return ENTITY_INTRODUCTIONS[self]

    @property
    def glossary_line(self) -> str:
        """One ``<kind>: <introduction>`` line for QA prompts."""
        text = PROMPT_GLOSSARY.get(self, ENTITY_INTRODUCTIONS[self] + ".")
        return f"{self.value.lower()}: {text}"


# Descriptions of each kind, as catalogued with the ontology.
ENTITY_INTRODUCTIONS: dict[EntityKind, str] = {
    EntityKind.TITLE: "The title of the paper",
    EntityKind.AUTHOR: "The author of the paper",
    EntityKind.INSTITUTION: "Author's institution",
    EntityKind.CONFERENCE: "Conference or journal in which papers are published",
    EntityKind.DATE: "Date of publication of the paper",
    EntityKind.FIELD: "The research field of the paper",
    EntityKind.KEYWORDS: "The topic phrase of the paper",
    EntityKind.INNOVATION: "The main innovation points of the paper",
    EntityKind.METHOD: "The method proposed in the paper",
    EntityKind.PROBLEM: "The problem mainly solved by the paper",
    EntityKind.MODEL: "The specific name of the model proposed in the paper",
    EntityKind.TASK: "Specific tasks of model application",
    EntityKind.DATASET: "Dataset used in the experiment",
    EntityKind.METRIC: "Metric used in the experiment",
    EntityKind.RESULT: "The main experimental results of the model",
}

# Category glossary shown to the model when answering over paper elements.
PROMPT_GLOSSARY: dict[EntityKind, str] = {
    EntityKind.TITLE: "Title of the paper.",
    EntityKind.TASK: "Task of the paper.",
    EntityKind.FIELD: "Research field of the paper.",
    EntityKind.METHOD: "Method of the paper.",
    EntityKind.PROBLEM: "Problem the paper aims to solve.",
    EntityKind.MODEL: "Model used in the paper.",
    EntityKind.DATASET: "Dataset used in the paper.",
}

# Kinds a question's relevant elements may be categorized into.
INTENT_KINDS: frozenset[EntityKind] = frozenset(PROMPT_GLOSSARY)

# Kinds merged by clustering-based disambiguation.
DISAMBIGUATION_KINDS: tuple[EntityKind, ...] = (
    EntityKind.TASK,
    EntityKind.DATASET,
    EntityKind.METRIC,
)

METADATA_KINDS: frozenset[EntityKind] = frozenset(
    {
        EntityKind.TITLE,
        EntityKind.AUTHOR,
        EntityKind.INSTITUTION,
        EntityKind.CONFERENCE,
        EntityKind.DATE,
    }
)


class RelationClass(str, Enum):
    INTRA_PAPER = "intra_paper"
    INTER_PAPER = "inter_paper"


class RelationKind(str, Enum):
    """The 17 named relations; identifiers are snake_case."""

    WRITES = "writes"
    WORKS_FOR = "works_for"
    PUBLISHES = "publishes"
    IS_WRITTEN_IN = "is_written_in"
    BELONGS_TO = "belongs_to"
    KEYWORDS = "keywords"
    SOLVES = "solves"
    ADOPTS = "adopts"
    PROPOSES = "proposes"
    WORKS_ON = "works_on"
    INNOVATES = "innovates"
    EXPERIMENTS_ON = "experiments_on"
    USES = "uses"
    FACES = "faces"
    ACHIEVES = "achieves"
    DIRECT_USE = "direct_use"
    TASK_RELATED = "task_related"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def relation_class(self) -> RelationClass:
        if self in (RelationKind.DIRECT_USE, RelationKind.TASK_RELATED):
            return RelationClass.INTER_PAPER
        return RelationClass.INTRA_PAPER

    @property
    def is_inter_paper(self) -> bool:
        return self.relation_class is RelationClass.INTER_PAPER

    @classmethod
    def parse(cls, name: str) -> "RelationKind":
        """Accept snake_case ids, display names and the sample-table aliases."""
        key = "_".join(name.strip().casefold().replace("-", " ").split())
        if key in _ALIASES:
            return _ALIASES[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"Unknown relation kind: {name!r}") from None


_DISPLAY_NAMES: dict[RelationKind, str] = {
    RelationKind.WRITES: "writes",
    RelationKind.WORKS_FOR: "works for",
    RelationKind.PUBLISHES: "publishes",
    RelationKind.IS_WRITTEN_IN: "is written in",
    RelationKind.BELONGS_TO: "belongs to",
    RelationKind.KEYWORDS: "keywords",
    RelationKind.SOLVES: "solves",
    RelationKind.ADOPTS: "adopts",
    RelationKind.PROPOSES: "proposes",
    RelationKind.WORKS_ON: "works on",
    RelationKind.INNOVATES: "innovates",
    RelationKind.EXPERIMENTS_ON: "experiments on",
    RelationKind.USES: "uses",
    RelationKind.FACES: "faces",
    RelationKind.ACHIEVES: "achieves",
    RelationKind.DIRECT_USE: "Direct use",
    RelationKind.TASK_RELATED: "Task correlation",
}

_ALIASES: dict[str, RelationKind] = {
    "date": RelationKind.IS_WRITTEN_IN,
    "task_correlation": RelationKind.TASK_RELATED,
}
