"""Contest metrics, judgment discrepancy, and k-fold cross-validation."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .corpus import ScoredTriple
from .errors import MetricUndefinedError

TIE_MODES = ("half", "exclude")


@dataclass(frozen=True)
class MetricReport:
    asd: float
    accuracy: float
    kendall: float
    n: int


def asd(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Mean absolute score difference; lower is better."""
    if len(pred) != len(truth):
        raise ValueError("pred and truth differ in length")
    if not pred:
        raise ValueError("cannot average zero differences")
    return math.fsum(abs(p - t) for p, t in zip(pred, truth)) / len(pred)


def accuracy_at_2(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Fraction of predictions within distance 2 of the truth (inclusive)."""
    if len(pred) != len(truth):
        raise ValueError("pred and truth differ in length")
    if not pred:
        raise ValueError("cannot average zero differences")
    hits = sum(1 for p, t in zip(pred, truth) if abs(p - t) <= 2)
    return hits / len(pred)


def kendall_tau_distance(
    pred: Sequence[float],
    truth: Sequence[float],
    groups: Iterable[Sequence[int]],
    tie_mode: str = "half",
) -> float:
    """Mean per-group ratio of discordant to comparable score-order pairs.

    Within each group (one person's triples), every unordered index pair
    with distinct truth scores is comparable; a pair the prediction orders
    the opposite way counts as discordant. Prediction-tied pairs count as
    half discordant under ``tie_mode='half'`` and are dropped from the
    comparable set under ``tie_mode='exclude'``. Groups with fewer than two
    members, or without comparable pairs, are skipped. Lower is better.
    """
    if len(pred) != len(truth):
        raise ValueError("pred and truth differ in length")
    if tie_mode not in TIE_MODES:
        raise ValueError(f"unknown tie mode {tie_mode!r}")
    per_group: list[float] = []
    for group in groups:
        if len(group) < 2:
            continue
        discordant = 0.0
        comparable = 0
        for i, j in combinations(group, 2):
            dt = truth[i] - truth[j]
            if dt == 0:
                continue
            dp = pred[i] - pred[j]
            if dp == 0:
                if tie_mode == "half":
                    comparable += 1
                    discordant += 0.5
                continue
            comparable += 1
            if (dt > 0) != (dp > 0):
                discordant += 1.0
        if comparable > 0:
            per_group.append(discordant / comparable)
    if not per_group:
        raise MetricUndefinedError("no comparable score-order pairs in any group")
    return math.fsum(per_group) / len(per_group)


def discrepancy(score: int) -> int:
    """Crowdworkers disagreeing with the majority for a 0..7 score."""
    if not 0 <= score <= 7:
        raise ValueError(f"score {score} outside 0..7")
    return min(score, 7 - score)


def group_indices_by_person(triples: Sequence[ScoredTriple]) -> list[list[int]]:
    groups: dict[str, list[int]] = {}
    for i, triple in enumerate(triples):
        groups.setdefault(triple.person, []).append(i)
    return list(groups.values())


def evaluate_predictions(
    pred: Sequence[int],
    triples: Sequence[ScoredTriple],
    tie_mode: str = "half",
) -> MetricReport:
    """All three contest metrics for predictions aligned with *triples*."""
    truth = [t.score for t in triples]
    return MetricReport(
        asd=asd(pred, truth),
        accuracy=accuracy_at_2(pred, truth),
        kendall=kendall_tau_distance(
            pred, truth, group_indices_by_person(triples), tie_mode
        ),
        n=len(triples),
    )


FitPredict = Callable[[Sequence[ScoredTriple], Sequence[ScoredTriple]], Sequence[int]]


def make_folds(
    n: int, k: int, seed: int, persons: Sequence[str] | None = None
) -> list[list[int]]:
    """Split indices 0..n-1 into k near-equal seeded folds.

    With *persons* given, all of one person's indices land in the same fold
    (person-grouped assignment for leakage-sensitivity runs).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = random.Random(seed)
    if persons is None:
        idx = list(range(n))
        rng.shuffle(idx)
        folds = []
        base, extra = divmod(n, k)
        start = 0
        for f in range(k):
            size = base + (1 if f < extra else 0)
            folds.append(idx[start : start + size])
            start += size
        return folds
    unique = list(dict.fromkeys(persons))
    rng.shuffle(unique)
    fold_of_person = {p: f % k for f, p in enumerate(unique)}
    folds = [[] for _ in range(k)]
    for i, person in enumerate(persons):
        folds[fold_of_person[person]].append(i)
    return folds


def kfold_cv(
    triples: Sequence[ScoredTriple],
    fit_predict: FitPredict,
    k: int = 10,
    seed: int = 0,
    group_by_person: bool = False,
    tie_mode: str = "half",
) -> MetricReport:
    """Seeded k-fold cross-validation aggregated over out-of-fold predictions."""
    n = len(triples)
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise ValueError(f"need at least k={k} triples, got {n}")
    persons = [t.person for t in triples] if group_by_person else None
    folds = make_folds(n, k, seed, persons)

    pred: list[int | None] = [None] * n
    for fold in folds:
        if not fold:
            continue
        in_fold = set(fold)
        train = [triples[i] for i in range(n) if i not in in_fold]
        test = [triples[i] for i in fold]
        fold_pred = fit_predict(train, test)
        if len(fold_pred) != len(test):
            raise ValueError("fit_predict returned the wrong number of predictions")
        for i, p in zip(fold, fold_pred):
            pred[i] = int(p)
    missing = [i for i, p in enumerate(pred) if p is None]
    if missing:
        raise MetricUndefinedError(f"{len(missing)} triples never predicted")
    return evaluate_predictions(pred, triples, tie_mode)
