"""
Text normalization for surface matching and tokenization for scoring.

Normalization pipeline (titles and entity surfaces):
1. Collapse whitespace
2. Case-fold
3. Strip terminal punctuation
"""

import re
import unicodedata
from typing import Callable

_TOKEN_RE = re.compile(r"[^\W_]+")
_WHITESPACE_RE = re.compile(r"\s+")


class SurfaceNormalizer:
    """Normalizes titles and entity surfaces for exact-after-normalization matching."""

    def __init__(self) -> None:
        self._pipeline: list[Callable[[str], str]] = [
            self.normalize_whitespace,
            self.casefold,
            self.strip_terminal_punctuation,
        ]

    def process(self, text: str) -> str:
        """Run text through the normalization pipeline."""
        if not text:
            return ""
        for step in self._pipeline:
            text = step(text)
        return text

    @staticmethod
    def normalize_whitespace(text: str) -> str:
        """Collapse all whitespace runs to single spaces."""
        return _WHITESPACE_RE.sub(" ", text).strip()

    @staticmethod
    def casefold(text: str) -> str:
        return unicodedata.normalize("NFKC", text).casefold()

    @staticmethod
    def strip_terminal_punctuation(text: str) -> str:
        """Drop trailing punctuation such as a final period or question mark."""
        end = len(text)
        while end > 0 and unicodedata.category(text[end - 1]).startswith("P"):
            end -= 1
        return text[:end].rstrip()


def tokenize(text: str) -> list[str]:
    """Unicode word tokens, case-folded, punctuation dropped."""
    return _TOKEN_RE.findall(unicodedata.normalize("NFKC", text).casefold())


# Singleton instance
normalizer = SurfaceNormalizer()


def normalize_surface(text: str) -> str:
    return normalizer.process(text)
