"""Shared text preprocessing: tokenization, stopword removal, stemming.

The same pipeline feeds both corpus indexing and embedding lookups so that
query terms and model vocabularies live in one term space (models are assumed
to be trained on stemmed text).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from . import porter

__all__ = ["Pipeline", "tokenize", "load_stopwords", "default_stopwords"]

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_MAX_DIGIT_RUN = 16


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric runs; pure numbers longer than 16 digits are dropped."""
    tokens = _TOKEN_RE.findall(text.lower())
    return [t for t in tokens if not (t.isdigit() and len(t) > _MAX_DIGIT_RUN)]


def load_stopwords(path: str) -> frozenset[str]:
    """Stopword file: UTF-8, one token per line, '#' lines ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return frozenset(words)


def default_stopwords() -> frozenset[str]:
    """The bundled 127-entry English stopword list.

    Assembled from common IR stopword lists as a stand-in; pass a stopword
    file to :class:`Pipeline` to use a specific list.
    """
    text = resources.files("simthresh").joinpath("data/stopwords_127.txt").read_text("utf-8")
    return frozenset(
        line.strip().lower() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


@dataclass(frozen=True)
class Pipeline:
    """Tokenize, drop stopwords, then Porter-stem. Order and duplicates preserved."""

    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    stem_enabled: bool = True

    @classmethod
    def from_stopword_file(cls, path: str | None, stem_enabled: bool = True) -> "Pipeline":
        stopwords = default_stopwords() if path is None else load_stopwords(path)
        return cls(stopwords=stopwords, stem_enabled=stem_enabled)

    def process(self, text: str) -> list[str]:
        terms = [t for t in tokenize(text) if t not in self.stopwords]
        if self.stem_enabled:
            terms = [porter.stem(t) for t in terms]
        return terms
