"""
Entity Error Detection

Rule detector over extracted surfaces plus the repair policy that turns a
verdict into keep, delete or re-extract. Rule lexicons live in
``app/resources/lexicons/generic_terms.txt``.

Rules, first match wins:
- InvalidData: empty, no letters or digits, or a placeholder ("n/a", "none").
- IncorrectFormatting: surrounding whitespace, embedded newlines, a key
  prefix ("Dataset: ..."), markup or quote residue, unbalanced brackets.
- NotSpecificEnough (name-like kinds): every token is a generic term or a
  number, or the surface opens with a possessive or indefinite ("our", "a new").
- RedundantInformation (name-like kinds): more than 12 words, or a token
  sequence repeated back to back.
"""

import re
from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

from app.core.exceptions import DetectorUnavailableError
from app.extraction.models import EntityCandidate, PromptRecord
from app.ontology import EntityKind
from app.utils import tokenize
from app.utils.resources import read_lexicon

GENERIC_LEXICON = "generic_terms.txt"
MAX_NAME_WORDS = 12

# Kinds whose surfaces are names rather than sentences.
NAME_KINDS: frozenset[EntityKind] = frozenset(
    {
        EntityKind.FIELD,
        EntityKind.KEYWORDS,
        EntityKind.MODEL,
        EntityKind.TASK,
        EntityKind.DATASET,
        EntityKind.METRIC,
    }
)

_MARKUP_RE = re.compile(r"</?\w+[^>]*>|[{}<>`|*#\\]")
_NUMBER_RE = re.compile(r"^\d+(?:[.,]\d+)?%?$")
_QUOTES = "\"'“”‘’"


class ErrorLabel(str, Enum):
    INVALID_DATA = "InvalidData"
    INCORRECT_FORMATTING = "IncorrectFormatting"
    NOT_SPECIFIC_ENOUGH = "NotSpecificEnough"
    REDUNDANT_INFORMATION = "RedundantInformation"
    CLEAN = "Clean"


class ErrorDetector(Protocol):
    detector_id: str

    def detect(self, entity_text: str, kind: EntityKind) -> ErrorLabel: ...


def _balanced(text: str) -> bool:
    depth = {"(": 0, "[": 0}
    closing = {")": "(", "]": "["}
    for ch in text:
        if ch in depth:
            depth[ch] += 1
        elif ch in closing:
            depth[closing[ch]] -= 1
            if depth[closing[ch]] < 0:
                return False
    return all(value == 0 for value in depth.values())


def _has_repeat(tokens: list[str]) -> bool:
    for width in range(1, len(tokens) // 2 + 1):
        for start in range(len(tokens) - 2 * width + 1):
            if tokens[start : start + width] == tokens[start + width : start + 2 * width]:
                return True
    return False


class RuleErrorDetector:
    """Lexicon-driven rules; see the module docstring for the rule order."""

    detector_id = "rules"

    def __init__(self, lexicon: Mapping[str, list[str]] | None = None) -> None:
        if lexicon is None:
            try:
                lexicon = read_lexicon(GENERIC_LEXICON)
            except (FileNotFoundError, OSError) as e:
                raise DetectorUnavailableError(f"Detector lexicon unavailable: {e}") from e
        self.placeholders = frozenset(lexicon.get("placeholder", []))
        self.generic = frozenset(lexicon.get("generic", []))
        self.vague_prefixes = tuple(lexicon.get("vague_prefix", []))
        self.key_prefixes = tuple(lexicon.get("key_prefix", []))

    def _invalid(self, text: str) -> bool:
        stripped = text.strip()
        return (
            not stripped
            or not any(ch.isalnum() for ch in stripped)
            or stripped.casefold().strip(" ." + _QUOTES) in self.placeholders
        )

    def _badly_formatted(self, text: str) -> bool:
        folded = text.casefold()
        return (
            text != text.strip()
            or "\n" in text
            or "\r" in text
            or folded.startswith(self.key_prefixes)
            or text[0] in _QUOTES
            or text[-1] in _QUOTES
            or _MARKUP_RE.search(text) is not None
            or not _balanced(text)
        )

    def _vague(self, text: str, tokens: list[str]) -> bool:
        folded = " ".join(text.casefold().split())
        if any(folded == p or folded.startswith(p + " ") for p in self.vague_prefixes):
            return True
        return all(token in self.generic or _NUMBER_RE.match(token) for token in tokens)

    def detect(self, entity_text: str, kind: EntityKind) -> ErrorLabel:
        if self._invalid(entity_text):
            return ErrorLabel.INVALID_DATA
        if self._badly_formatted(entity_text):
            return ErrorLabel.INCORRECT_FORMATTING
        if kind not in NAME_KINDS:
            return ErrorLabel.CLEAN
        tokens = tokenize(entity_text)
        if self._vague(entity_text, tokens):
            return ErrorLabel.NOT_SPECIFIC_ENOUGH
        if len(entity_text.split()) > MAX_NAME_WORDS or _has_repeat(tokens):
            return ErrorLabel.REDUNDANT_INFORMATION
        return ErrorLabel.CLEAN


def detect_error(
    entity_text: str, kind: EntityKind, detector: ErrorDetector | None = None
) -> ErrorLabel:
    return (detector or RuleErrorDetector()).detect(entity_text, kind)


# =============================================================================
# REPAIR POLICY
# =============================================================================


@dataclass(frozen=True)
class ReextractBundle:
    """Everything a re-extraction prompt needs."""

    entity_kind: EntityKind
    entity_text: str
    label: ErrorLabel
    prompt_digest: str | None
    original_prompt: str | None


@dataclass(frozen=True)
class Keep:
    pass


@dataclass(frozen=True)
class Delete:
    pass


@dataclass(frozen=True)
class Reextract:
    bundle: ReextractBundle


RepairDecision = Keep | Delete | Reextract


def apply_repair_policy(
    entity: EntityCandidate,
    label: ErrorLabel,
    prompts: Mapping[str, PromptRecord] | None = None,
) -> RepairDecision:
    """
    InvalidData deletes, Clean keeps, every other label re-extracts.

    Args:
        entity: The judged candidate
        label: Verdict from detect_error
        prompts: Prompt records by digest, to attach the original prompt
    """
    if label is ErrorLabel.CLEAN:
        return Keep()
    if label is ErrorLabel.INVALID_DATA:
        return Delete()
    record = (prompts or {}).get(entity.prompt_digest or "")
    return Reextract(
        ReextractBundle(
            entity_kind=entity.kind,
            entity_text=entity.surface,
            label=label,
            prompt_digest=entity.prompt_digest,
            original_prompt=record.prompt if record else None,
        )
    )
