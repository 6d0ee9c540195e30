"""Per-label keyword rankings by tf-idf over positive-example persons.

A label's positive examples are the persons whose candidate set consists of
that label alone. tf is the total occurrence count of a term across the
positive persons' documents; idf is 1/log of the term's corpus-wide count
(natural log). Terms seen only once corpus-wide are excluded because
1/log(1) is undefined.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import KnowledgeBase, PersonDocStore
from .errors import DataFormatError, TrainingError

log = logging.getLogger(__name__)

TOP_KEYWORDS = 200

# Corpus-count source for idf: total term occurrences, or the number of
# sentences containing the term. Collection frequency is the default.
COUNT_MODES = ("collection", "sentence")


@dataclass
class CorpusTermStats:
    """Corpus-wide term counts; both idf count sources live here."""

    total_count: Counter[str] = field(default_factory=Counter)
    sentence_count: Counter[str] = field(default_factory=Counter)

    def count(self, term: str, mode: str = "collection") -> int:
        if mode == "collection":
            return self.total_count.get(term, 0)
        if mode == "sentence":
            return self.sentence_count.get(term, 0)
        raise ValueError(f"unknown count mode {mode!r}")


@dataclass(frozen=True)
class KeywordEntry:
    term: str
    score: float
    rank: int


@dataclass
class KeywordRanking:
    """Top terms for one label, ordered by descending tf-idf score."""

    label: str
    entries: list[KeywordEntry] = field(default_factory=list)

    def terms(self, limit: int | None = None) -> list[str]:
        entries = self.entries if limit is None else self.entries[:limit]
        return [e.term for e in entries]

    def __len__(self) -> int:
        return len(self.entries)


def positive_examples(kb: KnowledgeBase) -> dict[str, set[str]]:
    """Map each label to the persons having that label as sole candidate."""
    out: dict[str, set[str]] = {label: set() for label in kb.label_counts()}
    for person, labels in kb.entries.items():
        if len(labels) == 1:
            out[labels[0]].add(person)
    for label, persons in out.items():
        if not persons:
            log.warning(
                "label %r has no single-candidate persons; its keyword "
                "ranking will be empty",
                label,
            )
    return out


def idf_weight(corpus_count: int) -> float | None:
    """1/log weight for a corpus count, or None where the weight is undefined.

    Counts below 2 have no usable weight: log(1) = 0 and log(0) diverges.
    """
    if corpus_count < 2:
        return None
    return 1.0 / math.log(corpus_count)


def rank_keywords(
    label: str,
    positives: set[str],
    docs: PersonDocStore,
    stats: CorpusTermStats,
    top: int = TOP_KEYWORDS,
    count_mode: str = "collection",
) -> KeywordRanking:
    """Rank the positive persons' terms by tf x idf and keep the top ones.

    Ties are broken by lexicographic term order for determinism.
    """
    if not positives:
        raise TrainingError(f"no positive examples for label {label!r}")
    if count_mode not in COUNT_MODES:
        raise ValueError(f"unknown count mode {count_mode!r}")

    tf: Counter[str] = Counter()
    for person in positives:
        doc = docs.get(person)
        if doc is not None:
            tf.update(doc.term_counts)

    scored: list[tuple[float, str]] = []
    for term, term_tf in tf.items():
        weight = idf_weight(stats.count(term, count_mode))
        if weight is None:
            continue
        scored.append((term_tf * weight, term))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))

    entries = [
        KeywordEntry(term=term, score=score, rank=rank)
        for rank, (score, term) in enumerate(scored[:top], start=1)
    ]
    return KeywordRanking(label, entries)


def rank_all(
    kb: KnowledgeBase,
    docs: PersonDocStore,
    stats: CorpusTermStats,
    top: int = TOP_KEYWORDS,
    count_mode: str = "collection",
) -> dict[str, KeywordRanking]:
    """Rank keywords for every label of *kb*; unrankable labels get an
    empty ranking instead of failing the whole run."""
    positives = positive_examples(kb)
    rankings: dict[str, KeywordRanking] = {}
    for label in sorted(positives):
        if positives[label]:
            rankings[label] = rank_keywords(
                label, positives[label], docs, stats, top, count_mode
            )
        else:
            rankings[label] = KeywordRanking(label, [])
    return rankings


def write_rankings(rankings: Iterable[KeywordRanking], path: str | Path) -> None:
    """Serialize rankings as ``label<TAB>rank<TAB>term<TAB>score`` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for ranking in rankings:
            for entry in ranking.entries:
                fh.write(
                    f"{ranking.label}\t{entry.rank}\t{entry.term}\t{entry.score!r}\n"
                )


def read_rankings(path: str | Path) -> dict[str, KeywordRanking]:
    rankings: dict[str, KeywordRanking] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            fields = raw.rstrip("\n").split("\t")
            if len(fields) != 4:
                raise DataFormatError(f"{path}: line {line_no}: expected 4 fields")
            label, rank_s, term, score_s = fields
            try:
                entry = KeywordEntry(term=term, score=float(score_s), rank=int(rank_s))
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {line_no}: bad rank or score"
                ) from None
            ranking = rankings.setdefault(label, KeywordRanking(label, []))
            if entry.rank != len(ranking.entries) + 1:
                raise DataFormatError(
                    f"{path}: line {line_no}: rank {entry.rank} out of sequence"
                )
            ranking.entries.append(entry)
    return rankings
