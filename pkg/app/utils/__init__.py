"""Utils module initialization."""

from app.utils.helpers import (
    atomic_write_text,
    dump_jsonl,
    file_sha256,
    iter_lines,
    sha256_hex,
    truncate_text,
    write_jsonl,
)
from app.utils.logging import configure_logging, get_logger
from app.utils.text import normalize_surface, tokenize

__all__ = [
    "atomic_write_text",
    "dump_jsonl",
    "file_sha256",
    "iter_lines",
    "sha256_hex",
    "truncate_text",
    "write_jsonl",
    "configure_logging",
    "get_logger",
    "normalize_surface",
    "tokenize",
]
