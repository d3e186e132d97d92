"""
Run manifests.

Every artifact-writing command appends one JSON line describing the run:
command and arguments, effective configuration, input hashes, stage
timings, output paths and the completion ledger summary. Manifest files are
only ever appended to.
"""

import time
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from app.core.config import Settings
from app.utils import file_sha256, get_logger, write_jsonl

logger = get_logger(__name__)

MANIFEST_NAME = "akg-manifest.jsonl"


@dataclass
class RunManifest:
    command: str
    arguments: dict[str, Any] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    stage_timings: dict[str, float] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    ledger: dict[str, int] = field(default_factory=dict)
    started_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    status: str = "ok"

    @classmethod
    def start(
        cls, command: str, settings: Settings, arguments: dict[str, Any] | None = None
    ) -> "RunManifest":
        args = {k: str(v) if isinstance(v, Path) else v for k, v in (arguments or {}).items()}
        return cls(command, args, settings.snapshot())

    def add_input(self, path: str | Path) -> None:
        self.inputs[str(path)] = file_sha256(path)

    def add_output(self, path: str | Path) -> None:
        self.outputs.append(str(path))

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time a pipeline stage."""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.stage_timings[name] = round(self.stage_timings.get(name, 0.0) + elapsed, 6)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "arguments": self.arguments,
            "started_at": self.started_at,
            "status": self.status,
            "config": self.config,
            "inputs": self.inputs,
            "stage_timings": self.stage_timings,
            "outputs": self.outputs,
            "ledger": self.ledger,
        }


def default_manifest_path(primary_output: str | Path) -> Path:
    return Path(primary_output).parent / MANIFEST_NAME


def append_manifest(path: str | Path, manifest: RunManifest) -> Path:
    """Append one manifest record; never rewrites earlier records."""
    write_jsonl(path, [manifest.to_dict()], append=True)
    logger.info("manifest_written", path=str(path), command=manifest.command)
    return Path(path)
