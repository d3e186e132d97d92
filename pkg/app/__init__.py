"""Academic Knowledge Graph - extraction, curation and sub-graph community QA."""

__version__ = "0.1.0"
