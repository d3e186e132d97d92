"""Custom exception classes.

Every error carries a stable ``code`` used by the CLI diagnostics and the
service's structured error bodies.
"""

from typing import Any


class KnowledgeGraphError(Exception):
    """Base exception for the academic knowledge graph toolkit."""

    code: str = "error"

    def __init__(self, message: str, details: Any = None):
        self.message = message
        self.details = details
        super().__init__(self.message)

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


class ConfigurationError(KnowledgeGraphError):
    """Raised when configuration cannot be loaded."""

    code = "config-error"


class StageError(KnowledgeGraphError):
    """Wraps an error with the pipeline stage that raised it."""

    code = "stage-error"

    def __init__(self, stage: str, cause: KnowledgeGraphError, partial: Any = None):
        self.stage = stage
        self.cause = cause
        self.partial = partial
        self.code = cause.code
        super().__init__(cause.message, cause.details)

    def to_dict(self) -> dict[str, Any]:
        return {**self.cause.to_dict(), "stage": self.stage}


# =============================================================================
# SCHEMA
# =============================================================================


class SchemaViolationError(KnowledgeGraphError):
    """Raised when a triple shape is not a legal relation signature."""

    code = "schema-violation"


class NoPathError(KnowledgeGraphError):
    """Raised when no canonical path links two entity kinds."""

    code = "no-path"


class UnknownKindError(KnowledgeGraphError):
    """Raised when a name is not an entity or relation kind."""

    code = "unknown-kind"


# =============================================================================
# CORPUS
# =============================================================================


class CorpusParseError(KnowledgeGraphError):
    """Raised when a corpus line is malformed."""

    code = "parse-error"


class MissingFieldError(CorpusParseError):
    """Raised when a required corpus field is absent."""

    code = "missing-required-field"


class DuplicateCorpusIdError(KnowledgeGraphError):
    """Raised when citation resolution meets duplicate corpus ids."""

    code = "duplicate-corpus-id"


class CorpusIOError(KnowledgeGraphError):
    """Raised when a corpus or dataset file cannot be read."""

    code = "io-error"


# =============================================================================
# LLM GATEWAY
# =============================================================================


class UnknownTemplateError(KnowledgeGraphError):
    """Raised when a prompt template id is not in the catalog."""

    code = "unknown-template"


class MissingSlotError(KnowledgeGraphError):
    """Raised when a required template slot is not bound."""

    code = "missing-slot"


class LLMError(KnowledgeGraphError):
    """Raised when LLM operations fail."""

    code = "completion-error"


class BackendUnreachableError(LLMError):
    """Raised when the completion backend cannot be reached."""

    code = "backend-unreachable"


class RateLimitError(LLMError):
    """Raised when rate limit is exceeded."""

    code = "rate-limited"


class FixtureMissingError(LLMError):
    """Raised by the strict mock backend when no fixture matches a prompt."""

    code = "fixture-missing"


class EmbeddingError(KnowledgeGraphError):
    """Raised when embedding generation fails."""

    code = "embedding-error"


class ProviderUnreachableError(EmbeddingError):
    """Raised when the embedding provider cannot be reached."""

    code = "provider-unreachable"


class EmptyInputTextError(EmbeddingError):
    """Raised when asked to embed an empty string."""

    code = "empty-input-text"


# =============================================================================
# EXTRACTION
# =============================================================================


class UnparseableOutputError(KnowledgeGraphError):
    """Raised when a completion cannot be parsed after the allowed re-asks."""

    code = "unparseable-output"


class NoTablesError(KnowledgeGraphError):
    """Raised when table screening is requested for a record without tables."""

    code = "no-tables"


class TableIndexError(KnowledgeGraphError):
    """Raised when a screened table index does not exist in the record."""

    code = "index-out-of-range"


class MissingElementsError(KnowledgeGraphError):
    """Raised when innovation summarization lacks both problem and method."""

    code = "missing-elements"


class ClassifierUnavailableError(KnowledgeGraphError):
    """Raised when the citation classifier backend is not configured."""

    code = "classifier-unavailable"


# =============================================================================
# CURATION
# =============================================================================


class DetectorUnavailableError(KnowledgeGraphError):
    """Raised when the error detector backend is not configured."""

    code = "detector-unavailable"


class DimensionMismatchError(KnowledgeGraphError):
    """Raised when clustering points do not share one dimension."""

    code = "dimension-mismatch"


class ClusterCountError(KnowledgeGraphError):
    """Raised when k is outside 1..n."""

    code = "k-out-of-range"


class MissingFrequencyError(KnowledgeGraphError):
    """Raised when a clustered surface has no frequency."""

    code = "missing-frequency"


# =============================================================================
# GRAPH STORE
# =============================================================================


class EmptySurfaceError(KnowledgeGraphError):
    """Raised when upserting an entity with an empty surface."""

    code = "empty-surface"


class DanglingEndpointError(KnowledgeGraphError):
    """Raised when a triple endpoint is not in the store."""

    code = "dangling-endpoint"


class UnknownEntityError(KnowledgeGraphError):
    """Raised when an entity id is not in the store."""

    code = "unknown-entity"


class KindMismatchError(KnowledgeGraphError):
    """Raised when a path walk starts from an entity of the wrong kind."""

    code = "kind-mismatch"


class NonTitleIdError(KnowledgeGraphError):
    """Raised when an inter-paper query receives a non-Title id."""

    code = "non-title-id"


class ReadOnlyGraphError(KnowledgeGraphError):
    """Raised when mutating a frozen store."""

    code = "read-only"


class SnapshotIOError(KnowledgeGraphError):
    """Raised when a snapshot cannot be read or written."""

    code = "io-error"


class CorruptSnapshotError(KnowledgeGraphError):
    """Raised when a snapshot fails its checksum or structure checks."""

    code = "corrupt-snapshot"


class SnapshotVersionError(KnowledgeGraphError):
    """Raised when a snapshot has an unsupported format version."""

    code = "version-mismatch"


# =============================================================================
# QUESTION ANSWERING
# =============================================================================


class EmptyQuestionError(KnowledgeGraphError):
    """Raised when asked an empty question."""

    code = "empty-question"


class UnparseableIntentError(UnparseableOutputError):
    """Raised when the intent completion cannot be parsed."""

    code = "unparseable-intent"


class NoMatchesError(KnowledgeGraphError):
    """Raised when no relevant element matches a graph entity."""

    code = "no-matches"


# =============================================================================
# EVALUATION / SERVICE
# =============================================================================


class DatasetFormatError(KnowledgeGraphError):
    """Raised when a QA dataset has malformed rows."""

    code = "format-error"


class EmptyStringError(KnowledgeGraphError):
    """Raised when scoring an empty candidate or reference."""

    code = "empty-string"


class EmptyDatasetError(KnowledgeGraphError):
    """Raised when evaluating an empty dataset."""

    code = "empty-dataset"


class RequestRejectedError(KnowledgeGraphError):
    """Raised when a service request violates a configured limit."""

    code = "request-rejected"
