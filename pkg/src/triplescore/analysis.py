"""Crowdworker-discrepancy correlation analysis over the training triples.

Produces the three figure datasets: candidate-option count against mean
judgment discrepancy (one point per person), log-popularity against mean
discrepancy for persons with a fixed candidate count, and familiarity
distributions grouped by discrepancy.
"""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import KnowledgeBase, PersonDocStore, ScoredTriple
from .metrics import discrepancy
from .stats import CorrelationResult, pearson

log = logging.getLogger(__name__)

MAX_DISCREPANCY = 3


def mean_discrepancy_by_person(triples: Sequence[ScoredTriple]) -> dict[str, float]:
    sums: dict[str, list[int]] = {}
    for t in triples:
        sums.setdefault(t.person, []).append(discrepancy(t.score))
    return {person: sum(values) / len(values) for person, values in sums.items()}


@dataclass(frozen=True)
class CandidateDiscrepancyPoint:
    person: str
    candidate_options: int
    mean_discrepancy: float


def candidate_option_correlation(
    triples: Sequence[ScoredTriple], kb: KnowledgeBase
) -> tuple[list[CandidateDiscrepancyPoint], CorrelationResult]:
    """Per-person candidate count vs mean judgment discrepancy."""
    means = mean_discrepancy_by_person(triples)
    points = [
        CandidateDiscrepancyPoint(person, kb.candidate_count(person), mean)
        for person, mean in sorted(means.items())
    ]
    result = pearson(
        [p.candidate_options for p in points],
        [p.mean_discrepancy for p in points],
    )
    return points, result


@dataclass(frozen=True)
class PopularityDiscrepancyPoint:
    person: str
    popularity: int
    log_popularity: float
    mean_discrepancy: float


def popularity_correlation(
    triples: Sequence[ScoredTriple],
    kb: KnowledgeBase,
    docs: PersonDocStore,
    candidate_count: int = 3,
) -> tuple[list[PopularityDiscrepancyPoint], CorrelationResult | None]:
    """Log-popularity vs mean discrepancy for persons with a fixed
    candidate-set size.

    Persons without any linked sentence are dropped (log of zero).
    Returns a None correlation when fewer than three points remain.
    """
    means = mean_discrepancy_by_person(triples)
    points: list[PopularityDiscrepancyPoint] = []
    for person, mean in sorted(means.items()):
        if kb.candidate_count(person) != candidate_count:
            continue
        popularity = docs.popularity(person)
        if popularity < 1:
            log.warning("person %r has no linked sentences; dropped from fig2", person)
            continue
        points.append(
            PopularityDiscrepancyPoint(person, popularity, math.log(popularity), mean)
        )
    if len(points) < 3:
        log.warning(
            "fig2 slice (candidate count %d) has %d point(s); correlation skipped",
            candidate_count,
            len(points),
        )
        return points, None
    result = pearson(
        [p.log_popularity for p in points],
        [p.mean_discrepancy for p in points],
    )
    return points, result


@dataclass(frozen=True)
class FamiliaritySummary:
    discrepancy: int
    count: int
    q1: float | None
    median: float | None
    q3: float | None


def familiarity_distribution(
    triples: Sequence[ScoredTriple], kb: KnowledgeBase
) -> tuple[list[tuple[int, int]], list[FamiliaritySummary]]:
    """Label-familiarity samples grouped by judgment discrepancy.

    Returns (samples, summaries): samples are (discrepancy, familiarity)
    pairs in triple order; summaries cover every discrepancy level 0..3,
    including empty ones.
    """
    samples = [(discrepancy(t.score), kb.familiarity(t.label)) for t in triples]
    grouped: dict[int, list[int]] = {d: [] for d in range(MAX_DISCREPANCY + 1)}
    for disc, familiarity in samples:
        grouped[disc].append(familiarity)
    summaries = []
    for disc in range(MAX_DISCREPANCY + 1):
        values = grouped[disc]
        if not values:
            summaries.append(FamiliaritySummary(disc, 0, None, None, None))
        elif len(values) == 1:
            v = float(values[0])
            summaries.append(FamiliaritySummary(disc, 1, v, v, v))
        else:
            q1, median, q3 = statistics.quantiles(values, n=4, method="inclusive")
            summaries.append(FamiliaritySummary(disc, len(values), q1, median, q3))
    return samples, summaries


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6g}"


def write_fig1_csv(
    points: Sequence[CandidateDiscrepancyPoint],
    result: CorrelationResult,
    path: str | Path,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# pearson_r={result.r:.6f} p_value={result.p_value:.6f} n={result.n}\n")
        fh.write("person,candidate_options,mean_discrepancy\n")
        for p in points:
            fh.write(f"{p.person},{p.candidate_options},{p.mean_discrepancy:.6f}\n")


def write_fig2_csv(
    points: Sequence[PopularityDiscrepancyPoint],
    result: CorrelationResult | None,
    candidate_count: int,
    path: str | Path,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if result is not None:
            fh.write(
                f"# candidate_count={candidate_count} pearson_r={result.r:.6f} "
                f"p_value={result.p_value:.6f} n={result.n}\n"
            )
        else:
            fh.write(f"# candidate_count={candidate_count} correlation=skipped\n")
        fh.write("person,popularity,log_popularity,mean_discrepancy\n")
        for p in points:
            fh.write(
                f"{p.person},{p.popularity},{p.log_popularity:.6f},"
                f"{p.mean_discrepancy:.6f}\n"
            )


def write_fig3_csv(
    samples: Sequence[tuple[int, int]],
    summaries: Sequence[FamiliaritySummary],
    path: str | Path,
    summary_path: str | Path,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("discrepancy,familiarity\n")
        for disc, familiarity in samples:
            fh.write(f"{disc},{familiarity}\n")
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("discrepancy,count,q1,median,q3\n")
        for s in summaries:
            fh.write(f"{s.discrepancy},{s.count},{_fmt(s.q1)},{_fmt(s.median)},{_fmt(s.q3)}\n")
