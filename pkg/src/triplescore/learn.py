"""Training orchestration: negative sampling, per-label classifiers,
score finalization, and model-file round-trips."""

from __future__ import annotations

import hashlib
import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import KnowledgeBase, PersonDocStore
from .errors import DataFormatError, InvariantError, TrainingError
from .keywords import KeywordRanking
from .logistic import LogisticModel, train_logistic
from .tree import TreeParams

log = logging.getLogger(__name__)

LR_KEYWORDS = 50
NEGATIVE_RATIO = 10


@dataclass(frozen=True)
class TrainSpec:
    """Everything that parameterizes training besides the data itself."""

    negative_ratio: int = NEGATIVE_RATIO
    seed: int = 0
    tree: TreeParams = field(default_factory=TreeParams)
    lr_cost: float = 1.0
    lr_top: int = LR_KEYWORDS
    lr_feature_mode: str = "counts"

    def __post_init__(self):
        if self.negative_ratio < 1:
            raise ValueError("negative_ratio must be >= 1")


def derive_seed(base_seed: int, *parts: str) -> int:
    """Stable per-component seed, independent of process hash randomization."""
    digest = hashlib.sha256(
        ":".join([str(base_seed), *parts]).encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "big")


def sample_negatives(
    label: str,
    kb: KnowledgeBase,
    positives: set[str],
    ratio: int = NEGATIVE_RATIO,
    seed: int = 0,
) -> list[str]:
    """Seeded sample (without replacement) of persons lacking *label*.

    Sample size is ratio x |positives|, clamped to the pool size. The pool
    is every knowledge-base person whose candidate set does not contain the
    label. An empty pool is an error.
    """
    if ratio < 1:
        raise ValueError("ratio must be >= 1")
    pool = sorted(p for p, labels in kb.entries.items() if label not in labels)
    if not pool:
        raise TrainingError(f"no negative pool for label {label!r}")
    size = min(ratio * len(positives), len(pool))
    return random.Random(seed).sample(pool, size)


def build_classifier_rows(
    persons: list[str],
    terms: list[str],
    docs: PersonDocStore,
    feature_mode: str = "counts",
) -> np.ndarray:
    """Keyword-count matrix: one row per person, one column per term."""
    rows = np.zeros((len(persons), len(terms)), dtype=float)
    for i, person in enumerate(persons):
        doc = docs.get(person)
        if doc is None:
            continue
        for j, term in enumerate(terms):
            count = doc.term_counts.get(term, 0)
            rows[i, j] = (1.0 if count > 0 else 0.0) if feature_mode == "binary" else float(count)
    return rows


def train_label_models(
    kb: KnowledgeBase,
    docs: PersonDocStore,
    rankings: Mapping[str, KeywordRanking],
    positives: Mapping[str, set[str]],
    spec: TrainSpec = TrainSpec(),
) -> dict[str, LogisticModel]:
    """One classifier per label; labels without positives get the neutral
    intercept-only model (estimate 0.5) and a warning."""
    models: dict[str, LogisticModel] = {}
    for label in sorted(kb.label_counts()):
        label_positives = positives.get(label, set())
        if not label_positives:
            log.warning("label %r untrainable (no positives); using neutral model", label)
            models[label] = LogisticModel(label=label, cost=spec.lr_cost)
            continue
        negatives = sample_negatives(
            label,
            kb,
            label_positives,
            ratio=spec.negative_ratio,
            seed=derive_seed(spec.seed, "negatives", label),
        )
        ranking = rankings.get(label)
        terms = ranking.terms(spec.lr_top) if ranking else []
        persons = sorted(label_positives) + negatives
        y = [1] * len(label_positives) + [0] * len(negatives)
        X = build_classifier_rows(persons, terms, docs, spec.lr_feature_mode)
        weights, bias = train_logistic(X, y, cost=spec.lr_cost)
        models[label] = LogisticModel(
            label=label,
            keyword_terms=terms,
            weights=[float(w) for w in weights],
            bias=float(bias),
            cost=spec.lr_cost,
        )
    return models


def finalize_score(raw: float) -> int:
    """Round a leaf mean in [0, 7] to an integer, halves away from zero."""
    if not (0.0 <= raw <= 7.0) or math.isnan(raw):
        raise InvariantError(f"raw prediction {raw!r} outside 0..7")
    return int(math.floor(raw + 0.5))


# Classifier-file format: a header line, then one "model" line per label
# followed by that model's term/weight lines.

_MODELS_MAGIC = "logistic-models"
_MODELS_VERSION = "1"


def write_models(models: Mapping[str, LogisticModel], path: str | Path) -> None:
    lines = [f"{_MODELS_MAGIC}\t{_MODELS_VERSION}"]
    for label in sorted(models):
        m = models[label]
        lines.append(f"model\t{m.label}\t{m.cost!r}\t{m.bias!r}\t{len(m.keyword_terms)}")
        for term, weight in zip(m.keyword_terms, m.weights):
            lines.append(f"term\t{term}\t{weight!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_models(path: str | Path) -> dict[str, LogisticModel]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t") != [_MODELS_MAGIC, _MODELS_VERSION]:
        raise DataFormatError(f"{path}: not a version-{_MODELS_VERSION} models file")
    models: dict[str, LogisticModel] = {}
    current: LogisticModel | None = None
    expected_terms = 0
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if fields[0] == "model" and len(fields) == 5:
            if current is not None and len(current.keyword_terms) != expected_terms:
                raise DataFormatError(f"{path}: term count mismatch before line {line_no}")
            current = LogisticModel(
                label=fields[1], cost=float(fields[2]), bias=float(fields[3])
            )
            expected_terms = int(fields[4])
            models[current.label] = current
        elif fields[0] == "term" and len(fields) == 3:
            if current is None:
                raise DataFormatError(f"{path}: line {line_no}: term before any model")
            current.keyword_terms.append(fields[1])
            current.weights.append(float(fields[2]))
        else:
            raise DataFormatError(f"{path}: line {line_no}: unrecognized line")
    if current is not None and len(current.keyword_terms) != expected_terms:
        raise DataFormatError(f"{path}: term count mismatch at end of file")
    return models
