"""Loader for packaged text assets (prompt templates, rule lexicons)."""

from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def read_asset(*parts: str) -> str:
    """Read a UTF-8 asset under ``app/resources``."""
    node = resources.files("app.resources")
    for part in parts:
        node = node.joinpath(part)
    return node.read_text(encoding="utf-8")


def read_lexicon(name: str) -> dict[str, list[str]]:
    """
    Parse a lexicon asset into sections.

    Format: ``[section]`` headers followed by one entry per line;
    ``#`` starts a comment line.
    """
    sections: dict[str, list[str]] = {}
    current = "default"
    for raw in read_asset("lexicons", name).splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, [])
            continue
        sections.setdefault(current, []).append(line.casefold())
    return sections
