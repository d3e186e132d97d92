"""API middleware module."""

from app.api.middleware.logging import RequestLoggingMiddleware
from app.api.middleware.rate_limit import RateLimitMiddleware

__all__ = ["RateLimitMiddleware", "RequestLoggingMiddleware"]
