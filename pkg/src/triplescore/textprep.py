"""Deterministic tokenization and term filtering for person documents."""

from __future__ import annotations

import re
from pathlib import Path

# Maximal runs of Unicode letters/digits; underscore, hyphens and
# apostrophes all act as boundaries.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class StopwordSet:
    """Set of lowercase stopword terms loaded from a plain-text file.

    File format: one term per line, UTF-8, lines starting with '#' and
    blank lines ignored. Entries are lowercased on load.
    """

    def __init__(self, terms: set[str] | None = None):
        self.terms = {t.lower() for t in (terms or set())}

    @classmethod
    def from_file(cls, path: str | Path) -> "StopwordSet":
        terms = set()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                term = line.strip()
                if not term or term.startswith("#"):
                    continue
                terms.add(term.lower())
        return cls(terms)

    def __contains__(self, term: str) -> bool:
        return term in self.terms

    def __len__(self) -> int:
        return len(self.terms)


EMPTY_STOPWORDS = StopwordSet()


def tokenize(text: str, stopwords: StopwordSet) -> list[str]:
    """Split *text* into filtered lowercase terms.

    Token boundaries are maximal alphanumeric runs. After lowercasing,
    one-letter terms (one Unicode scalar), digit-only terms and stopwords
    are dropped. Empty input yields an empty list.
    """
    out = []
    for raw in _TOKEN_RE.findall(text):
        term = raw.lower()
        if len(term) == 1:
            continue
        if term.isdigit():
            continue
        if term in stopwords:
            continue
        out.append(term)
    return out
