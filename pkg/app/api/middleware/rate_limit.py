"""Per-client request cap."""

import threading
import time
from collections import defaultdict, deque

from fastapi import Request, Response, status
from fastapi.responses import JSONResponse
from starlette.middleware.base import BaseHTTPMiddleware, RequestResponseEndpoint
from starlette.types import ASGIApp

from app.core.exceptions import RequestRejectedError
from app.utils import get_logger

logger = get_logger(__name__)

WINDOW_SECONDS = 60.0


class RateLimitMiddleware(BaseHTTPMiddleware):
    """
    Sliding one-minute window per client address.

    Requests over ``per_minute`` are answered with 429 and the
    ``request-rejected`` error body. A cap of 0 disables the check.
    """

    EXCLUDED_PATHS = ("/api/v1/health",)

    def __init__(self, app: ASGIApp, per_minute: int) -> None:
        super().__init__(app)
        self.per_minute = per_minute
        self._hits: defaultdict[str, deque[float]] = defaultdict(deque)
        self._lock = threading.Lock()

    def _admit(self, client: str, now: float) -> bool:
        with self._lock:
            hits = self._hits[client]
            while hits and now - hits[0] >= WINDOW_SECONDS:
                hits.popleft()
            if len(hits) >= self.per_minute:
                return False
            hits.append(now)
            return True

    async def dispatch(self, request: Request, call_next: RequestResponseEndpoint) -> Response:
        if self.per_minute <= 0 or request.url.path.startswith(self.EXCLUDED_PATHS):
            return await call_next(request)

        client = request.client.host if request.client else "unknown"
        if not self._admit(client, time.monotonic()):
            logger.warning("request_rate_limited", client=client, path=request.url.path)
            error = RequestRejectedError(
                "Too many requests", details={"limit_per_minute": self.per_minute}
            )
            return JSONResponse(
                status_code=status.HTTP_429_TOO_MANY_REQUESTS,
                content={"error": {**error.to_dict(), "stage": "request"}},
            )
        return await call_next(request)
