"""Extraction: prompt pipelines from papers to entity and triple candidates."""

from app.extraction.citations import (
    CitationClassifier,
    CueLexiconClassifier,
    LLMCitationClassifier,
    build_classifier,
    classify_citation,
)
from app.extraction.elements import ElementExtractor, result_surface
from app.extraction.models import (
    CitationLabel,
    CitationRelation,
    EntityCandidate,
    EntityRef,
    ExtractedElements,
    ExtractionResult,
    PaperExtraction,
    PromptRecord,
    StageFailure,
    TripleCandidate,
)
from app.extraction.pipeline import ExtractionPipeline, run_extraction

__all__ = [
    "CitationClassifier",
    "CueLexiconClassifier",
    "LLMCitationClassifier",
    "build_classifier",
    "classify_citation",
    "ElementExtractor",
    "result_surface",
    "CitationLabel",
    "CitationRelation",
    "EntityCandidate",
    "EntityRef",
    "ExtractedElements",
    "ExtractionResult",
    "PaperExtraction",
    "PromptRecord",
    "StageFailure",
    "TripleCandidate",
    "ExtractionPipeline",
    "run_extraction",
]
