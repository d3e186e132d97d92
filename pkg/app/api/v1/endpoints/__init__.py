"""API v1 endpoints module."""

from app.api.v1.endpoints import ask, graph, health

__all__ = ["ask", "graph", "health"]
