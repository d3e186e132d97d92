"""
Prompt Templates

Versioned catalog of prompt templates shipped as text assets under
``app/resources/templates``. Slots use ``$name`` syntax; every slot that
appears in a body is required.
"""

from collections.abc import Mapping
from dataclasses import dataclass
from string import Template
from typing import Any

from app.core.exceptions import MissingSlotError, UnknownTemplateError
from app.utils.resources import read_asset

CATALOG_VERSION = "akg-prompts/1"

# =============================================================================
# TEMPLATE IDS
# =============================================================================

TEXT_ELEMENTS = "text_elements"
PAPER_SCREENING = "paper_screening"
TABLE_SCREENING = "table_screening"
TABLE_EXTRACTION = "table_extraction"
INNOVATION = "innovation"
REASK = "reask"
REEXTRACT = "reextract"
CITATION_CLASSIFICATION = "citation_classification"
CANONICAL_EXTENSION = "canonical_extension"
INTENT = "intent"
COMMUNITY_ANSWER = "community_answer"
GLOBAL_ANSWER = "global_answer"
DIRECT_ANSWER = "direct_answer"
UNGUIDED_ANSWER = "unguided_answer"
BASELINE_ANSWER = "baseline_answer"

TEMPLATE_IDS: tuple[str, ...] = (
    TEXT_ELEMENTS,
    PAPER_SCREENING,
    TABLE_SCREENING,
    TABLE_EXTRACTION,
    INNOVATION,
    REASK,
    REEXTRACT,
    CITATION_CLASSIFICATION,
    CANONICAL_EXTENSION,
    INTENT,
    COMMUNITY_ANSWER,
    GLOBAL_ANSWER,
    DIRECT_ANSWER,
    UNGUIDED_ANSWER,
    BASELINE_ANSWER,
)

# Fixed answer when no evidence exists and unguided answering is disabled.
INSUFFICIENT_EVIDENCE_ANSWER = (
    "Insufficient evidence in the knowledge graph to answer this question. "
    "No paper elements matched the question."
)


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str

    @property
    def required_slots(self) -> frozenset[str]:
        return frozenset(Template(self.body).get_identifiers())

    def render(self, slots: Mapping[str, Any]) -> str:
        """
        Substitute every slot.

        Raises:
            MissingSlotError: Naming the unbound slots
        """
        missing = sorted(self.required_slots - set(slots))
        if missing:
            raise MissingSlotError(
                f"Template '{self.template_id}' is missing slot(s): {', '.join(missing)}",
                details={"template_id": self.template_id, "missing": missing},
            )
        values = {name: "" if value is None else str(value) for name, value in slots.items()}
        return Template(self.body).substitute(values)


class PromptCatalog:
    """Lazily loaded, read-only template catalog."""

    def __init__(self, version: str = CATALOG_VERSION) -> None:
        self.version = version
        self._templates: dict[str, PromptTemplate] = {}

    def get(self, template_id: str) -> PromptTemplate:
        if template_id not in TEMPLATE_IDS:
            raise UnknownTemplateError(
                f"Unknown prompt template: {template_id}",
                details={"template_id": template_id, "known": list(TEMPLATE_IDS)},
            )
        template = self._templates.get(template_id)
        if template is None:
            template = PromptTemplate(template_id, read_asset("templates", f"{template_id}.txt"))
            self._templates[template_id] = template
        return template

    def render(self, template_id: str, slots: Mapping[str, Any]) -> str:
        return self.get(template_id).render(slots)

    def ids(self) -> tuple[str, ...]:
        return TEMPLATE_IDS


# Singleton instance
prompt_catalog = PromptCatalog()


def render_prompt(template_id: str, slots: Mapping[str, Any]) -> str:
    """Render a catalog template; raises UnknownTemplateError or MissingSlotError."""
    return prompt_catalog.render(template_id, slots)
