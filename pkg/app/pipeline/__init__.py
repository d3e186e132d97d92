"""Pipeline: the graph construction stages wired together."""

from app.pipeline.builder import BuildResult, GraphBuilder

__all__ = ["BuildResult", "GraphBuilder"]
