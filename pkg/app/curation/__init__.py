"""Curation: error repair and clustering-based disambiguation."""

from app.curation.canonical import (
    CanonicalMap,
    DisambiguationParams,
    Disambiguator,
    KindDisambiguation,
    PropagationReport,
    choose_representatives,
    disambiguate,
    load_maps,
    propagate_canonicalization,
    run_disambiguation,
)
from app.curation.clustering import ClusteringProblem, ClusteringResult, kmeans, select_k
from app.curation.curator import CurationRecord, CurationReport, Curator, run_curation
from app.curation.detection import (
    Delete,
    ErrorDetector,
    ErrorLabel,
    Keep,
    Reextract,
    ReextractBundle,
    RepairDecision,
    RuleErrorDetector,
    apply_repair_policy,
    detect_error,
)

__all__ = [
    "CanonicalMap",
    "DisambiguationParams",
    "Disambiguator",
    "KindDisambiguation",
    "PropagationReport",
    "choose_representatives",
    "disambiguate",
    "load_maps",
    "propagate_canonicalization",
    "run_disambiguation",
    "ClusteringProblem",
    "ClusteringResult",
    "kmeans",
    "select_k",
    "CurationRecord",
    "CurationReport",
    "Curator",
    "run_curation",
    "Delete",
    "ErrorDetector",
    "ErrorLabel",
    "Keep",
    "Reextract",
    "ReextractBundle",
    "RepairDecision",
    "RuleErrorDetector",
    "apply_repair_policy",
    "detect_error",
]
