"""The eight model inputs for a (person, label) pair.

Three task-difficulty counts (person popularity, label familiarity,
candidate options), three text-relevance values (exact phrase count,
1/rank-weighted keyword count, classifier estimate), and per-person
max-normalized copies of the last two.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import KnowledgeBase, PersonDoc, PersonDocStore
from .errors import InvariantError
from .keywords import KeywordRanking
from .logistic import LogisticModel

log = logging.getLogger(__name__)

WKC_KEYWORDS = 20
WKC_MODES = ("occurrence", "presence")

FEATURE_NAMES = (
    "person_popularity",
    "label_familiarity",
    "candidate_options",
    "exact_count",
    "weighted_keyword_count",
    "lr_estimate",
    "weighted_keyword_count_norm",
    "lr_estimate_norm",
)

# Feature-column subsets for the two evaluation conditions.
CONDITIONS = {
    "rel": (3, 4, 5, 6, 7),
    "full": tuple(range(8)),
}


@dataclass(frozen=True)
class FeatureVector:
    person_popularity: int
    label_familiarity: int
    candidate_options: int
    exact_count: int
    weighted_keyword_count: float
    lr_estimate: float
    weighted_keyword_count_norm: float
    lr_estimate_norm: float

    def as_tuple(self) -> tuple[float, ...]:
        return (
            float(self.person_popularity),
            float(self.label_familiarity),
            float(self.candidate_options),
            float(self.exact_count),
            self.weighted_keyword_count,
            self.lr_estimate,
            self.weighted_keyword_count_norm,
            self.lr_estimate_norm,
        )

    def __post_init__(self):
        values = self.as_tuple()
        if any(math.isnan(v) or math.isinf(v) for v in values):
            raise InvariantError(f"non-finite feature value in {values}")
        if min(values[:5]) < 0:
            raise InvariantError("count and keyword features must be nonnegative")
        for v in (
            self.lr_estimate,
            self.weighted_keyword_count_norm,
            self.lr_estimate_norm,
        ):
            if not 0.0 <= v <= 1.0:
                raise InvariantError(f"unit-interval feature out of range: {v}")


def person_popularity(person: str, docs: PersonDocStore) -> int:
    """Number of corpus lines linked to the person (0 when absent)."""
    return docs.popularity(person)


def label_familiarity(label: str, kb: KnowledgeBase) -> int:
    """Number of persons whose candidate set contains the label."""
    count = kb.familiarity(label)
    if count == 0:
        log.warning("label %r unknown to the %s knowledge base", label, kb.kind)
    return count


def candidate_options(person: str, kb: KnowledgeBase) -> int:
    """Size of the person's candidate label set (0 when absent)."""
    return kb.candidate_count(person)


def exact_count(doc: PersonDoc | None, label: str) -> int:
    """Case-insensitive occurrences of the full label phrase in the
    person's aggregated clean text."""
    if doc is None:
        return 0
    folded = label.casefold()
    try:
        return doc.phrase_counts[folded]
    except KeyError:
        raise InvariantError(
            f"phrase {label!r} was not registered when {doc.person!r} was built"
        ) from None


def weighted_keyword_count(
    doc: PersonDoc | None,
    ranking: KeywordRanking | None,
    top: int = WKC_KEYWORDS,
    mode: str = "occurrence",
) -> float:
    """Sum of 1/rank weights of the ranking's leading keywords in the doc.

    Under the default occurrence mode every occurrence contributes its
    rank weight; the presence mode counts each keyword at most once.
    Missing documents or empty rankings give 0.
    """
    if mode not in WKC_MODES:
        raise ValueError(f"unknown weighting mode {mode!r}")
    if doc is None or ranking is None or not ranking.entries:
        return 0.0
    total = 0.0
    for entry in ranking.entries[:top]:
        count = doc.term_counts.get(entry.term, 0)
        if count == 0:
            continue
        weight = 1.0 / entry.rank
        total += weight if mode == "presence" else count * weight
    return total


def lr_estimate(
    person: str,
    label: str,
    models: Mapping[str, LogisticModel],
    docs: PersonDocStore,
    feature_mode: str = "counts",
) -> float:
    """Classifier probability that the label is primary for the person."""
    model = models.get(label)
    if model is None:
        raise InvariantError(f"no classifier trained for label {label!r}")
    doc = docs.get(person)
    counts: Mapping[str, int] = doc.term_counts if doc else {}
    return model.estimate(counts, feature_mode)


def normalize_per_person(values: Mapping[str, float]) -> dict[str, float]:
    """Divide each value by the per-person maximum; all zeros stay zero."""
    if not values:
        return {}
    peak = max(values.values())
    if peak <= 0:
        return {label: 0.0 for label in values}
    return {label: v / peak for label, v in values.items()}


class FeatureContext:
    """Read-only bundle of stores needed to assemble feature vectors.

    Vectors are cached per person because the two normalized fields
    depend on the person's whole candidate set.
    """

    def __init__(
        self,
        kb: KnowledgeBase,
        docs: PersonDocStore,
        rankings: Mapping[str, KeywordRanking],
        models: Mapping[str, LogisticModel],
        wkc_top: int = WKC_KEYWORDS,
        wkc_mode: str = "occurrence",
        lr_feature_mode: str = "counts",
    ):
        self.kb = kb
        self.docs = docs
        self.rankings = rankings
        self.models = models
        self.wkc_top = wkc_top
        self.wkc_mode = wkc_mode
        self.lr_feature_mode = lr_feature_mode
        self._cache: dict[str, dict[str, FeatureVector]] = {}

    def _assemble(self, person: str, labels: tuple[str, ...]) -> dict[str, FeatureVector]:
        doc = self.docs.get(person)
        popularity = doc.mention_count if doc else 0
        options = self.kb.candidate_count(person)
        wkc = {
            label: weighted_keyword_count(
                doc, self.rankings.get(label), self.wkc_top, self.wkc_mode
            )
            for label in labels
        }
        lr = {
            label: lr_estimate(person, label, self.models, self.docs, self.lr_feature_mode)
            for label in labels
        }
        wkc_norm = normalize_per_person(wkc)
        lr_norm = normalize_per_person(lr)
        return {
            label: FeatureVector(
                person_popularity=popularity,
                label_familiarity=label_familiarity(label, self.kb),
                candidate_options=options,
                exact_count=exact_count(doc, label),
                weighted_keyword_count=wkc[label],
                lr_estimate=lr[label],
                weighted_keyword_count_norm=wkc_norm[label],
                lr_estimate_norm=lr_norm[label],
            )
            for label in labels
        }

    def vectors_for_person(self, person: str) -> dict[str, FeatureVector]:
        cached = self._cache.get(person)
        if cached is None:
            cached = self._cache[person] = self._assemble(
                person, self.kb.candidates(person)
            )
        return cached

    def vector(self, person: str, label: str) -> FeatureVector:
        vectors = self.vectors_for_person(person)
        if label in vectors:
            return vectors[label]
        # Pair outside the candidate set (possible in hand-built training
        # data): normalize across candidates plus this label, uncached.
        labels = tuple(dict.fromkeys(self.kb.candidates(person) + (label,)))
        return self._assemble(person, labels)[label]


def feature_matrix(
    vectors: Iterable[FeatureVector], condition: str = "full"
) -> np.ndarray:
    """Stack vectors into a float matrix with the condition's columns."""
    columns = CONDITIONS[condition]
    rows = [[fv.as_tuple()[c] for c in columns] for fv in vectors]
    return np.asarray(rows, dtype=float).reshape(len(rows), len(columns))


def condition_feature_names(condition: str = "full") -> tuple[str, ...]:
    return tuple(FEATURE_NAMES[c] for c in CONDITIONS[condition])


def write_feature_matrix(
    rows: Iterable[tuple[str, str, FeatureVector]], path: str | Path
) -> None:
    """Dump ``person<TAB>label<TAB>f1..f8`` lines, 6-decimal fixed format."""
    with open(path, "w", encoding="utf-8") as fh:
        for person, label, fv in rows:
            values = "\t".join(f"{v:.6f}" for v in fv.as_tuple())
            fh.write(f"{person}\t{label}\t{values}\n")
