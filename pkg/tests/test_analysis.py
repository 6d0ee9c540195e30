from __future__ import annotations

import pytest

from triplescore.analysis import (
    candidate_option_correlation,
    familiarity_distribution,
    mean_discrepancy_by_person,
    popularity_correlation,
    write_fig1_csv,
    write_fig2_csv,
    write_fig3_csv,
)
from triplescore.corpus import KnowledgeBase, ScoredTriple, load_scored
from triplescore.errors import MetricUndefinedError


def triples_from(rows):
    return [ScoredTriple(p, l, s) for p, l, s in rows]


class TestMeanDiscrepancy:
    def test_averages_per_person(self):
        triples = triples_from([("A", "x", 0), ("A", "y", 3), ("B", "x", 6)])
        assert mean_discrepancy_by_person(triples) == {"A": 1.5, "B": 1.0}


class TestCandidateOptionCorrelation:
    def test_fixture_has_positive_trend(self, fixture_stores, fixture_config):
        triples = load_scored(fixture_config.profession_train)
        points, result = candidate_option_correlation(
            triples, fixture_stores.kbs["profession"]
        )
        assert len(points) == 12  # one point per person
        assert result.n == 12
        assert -1.0 <= result.r <= 1.0

    def test_constant_discrepancy_is_zero_variance_error(self):
        kb = KnowledgeBase("profession", {"A": ["x"], "B": ["x", "y"], "C": ["x", "y", "z"]})
        triples = triples_from([("A", "x", 0), ("B", "x", 7), ("C", "x", 0)])
        with pytest.raises(MetricUndefinedError):
            candidate_option_correlation(triples, kb)


class TestPopularityCorrelation:
    def test_small_slice_skipped(self, fixture_stores, fixture_config):
        triples = load_scored(fixture_config.profession_train)
        points, result = popularity_correlation(
            triples, fixture_stores.kbs["profession"], fixture_stores.docs, 3
        )
        assert result is None  # only two fixture persons have 3 candidates
        assert len(points) == 2

    def test_two_candidate_slice_correlates(self, fixture_stores, fixture_config):
        triples = load_scored(fixture_config.profession_train)
        points, result = popularity_correlation(
            triples, fixture_stores.kbs["profession"], fixture_stores.docs, 2
        )
        assert result is not None
        assert result.n == len(points) >= 3

    def test_zero_popularity_person_dropped(self):
        kb = KnowledgeBase(
            "profession",
            {"A": ["x", "y"], "B": ["x", "y"], "C": ["x", "y"], "D": ["x", "y"]},
        )
        from triplescore.corpus import PersonDocStore, PersonDoc

        docs = PersonDocStore(
            {p: PersonDoc(p, mention_count=i + 1) for i, p in enumerate("ABC")}
        )
        triples = triples_from(
            [("A", "x", 0), ("B", "x", 1), ("C", "x", 3), ("D", "x", 2)]
        )
        points, _ = popularity_correlation(triples, kb, docs, 2)
        assert [p.person for p in points] == ["A", "B", "C"]


class TestFamiliarityDistribution:
    def test_monotone_synthetic_medians(self):
        # familiarity counts in the kb: common=4 persons, rare=1
        kb = KnowledgeBase(
            "profession",
            {
                "A": ["common"],
                "B": ["common"],
                "C": ["common"],
                "D": ["common", "rare"],
            },
        )
        triples = triples_from(
            [
                ("A", "common", 0),  # discrepancy 0, familiarity 4
                ("B", "common", 7),
                ("C", "common", 1),  # discrepancy 1
                ("D", "rare", 3),  # discrepancy 3, familiarity 1
            ]
        )
        _, summaries = familiarity_distribution(triples, kb)
        medians = {s.discrepancy: s.median for s in summaries}
        assert medians[0] == 4
        assert medians[1] == 4
        assert medians[2] is None
        assert medians[3] == 1

    def test_single_triple(self):
        kb = KnowledgeBase("profession", {"A": ["x"]})
        samples, summaries = familiarity_distribution(
            triples_from([("A", "x", 7)]), kb
        )
        assert samples == [(0, 1)]
        counts = {s.discrepancy: s.count for s in summaries}
        assert counts == {0: 1, 1: 0, 2: 0, 3: 0}
        only = next(s for s in summaries if s.count == 1)
        assert only.q1 == only.median == only.q3 == 1.0

    def test_quartiles_cover_groups(self, fixture_stores, fixture_config):
        triples = load_scored(fixture_config.profession_train)
        samples, summaries = familiarity_distribution(
            triples, fixture_stores.kbs["profession"]
        )
        assert len(samples) == len(triples)
        assert sum(s.count for s in summaries) == len(triples)
        for s in summaries:
            if s.count >= 2:
                assert s.q1 <= s.median <= s.q3


class TestCsvWriters:
    def test_fig_csvs_written(self, tmp_path, fixture_stores, fixture_config):
        triples = load_scored(fixture_config.profession_train)
        kb = fixture_stores.kbs["profession"]

        points1, corr1 = candidate_option_correlation(triples, kb)
        path1 = tmp_path / "fig1.csv"
        write_fig1_csv(points1, corr1, path1)
        lines = path1.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("# pearson_r=")
        assert lines[1] == "person,candidate_options,mean_discrepancy"
        assert len(lines) == 2 + len(points1)

        points2, corr2 = popularity_correlation(triples, kb, fixture_stores.docs, 3)
        path2 = tmp_path / "fig2.csv"
        write_fig2_csv(points2, corr2, 3, path2)
        assert "correlation=skipped" in path2.read_text(encoding="utf-8").splitlines()[0]

        samples, summaries = familiarity_distribution(triples, kb)
        path3 = tmp_path / "fig3.csv"
        summary3 = tmp_path / "fig3_summary.csv"
        write_fig3_csv(samples, summaries, path3, summary3)
        assert len(path3.read_text(encoding="utf-8").splitlines()) == 1 + len(samples)
        summary_lines = summary3.read_text(encoding="utf-8").splitlines()
        assert summary_lines[0] == "discrepancy,count,q1,median,q3"
        assert len(summary_lines) == 5
