from __future__ import annotations

import math
from collections import Counter

import pytest

from triplescore.corpus import (
    KnowledgeBase,
    PersonDoc,
    PersonDocStore,
    build_person_docs,
)
from triplescore.errors import InvariantError
from triplescore.features import (
    FEATURE_NAMES,
    FeatureContext,
    FeatureVector,
    candidate_options,
    condition_feature_names,
    exact_count,
    feature_matrix,
    label_familiarity,
    lr_estimate,
    normalize_per_person,
    person_popularity,
    weighted_keyword_count,
    write_feature_matrix,
)
from triplescore.keywords import KeywordEntry, KeywordRanking
from triplescore.logistic import LogisticModel
from triplescore.textprep import EMPTY_STOPWORDS


def ranking(label, *terms):
    return KeywordRanking(
        label,
        [KeywordEntry(t, 1.0 / (i + 1), i + 1) for i, t in enumerate(terms)],
    )


class TestCountFeatures:
    def test_popularity(self):
        result = build_person_docs(["[A] one .", "[A] two ."], {"A"}, EMPTY_STOPWORDS)
        assert person_popularity("A", result.store) == 2
        assert person_popularity("missing", result.store) == 0

    def test_popularity_matches_line_scan(self, fixture_dir, fixture_stores):
        lines = (fixture_dir / "wiki-sentences").read_text(encoding="utf-8").splitlines()
        for person in ("Ada Brook", "Leo Marsh", "Eva Finch"):
            expected = sum(1 for line in lines if f"[{person}]" in line)
            assert person_popularity(person, fixture_stores.docs) == expected

    def test_familiarity(self):
        kb = KnowledgeBase("profession", {"A": ["Actor"], "B": ["Actor", "Singer"]})
        assert label_familiarity("Actor", kb) == 2
        assert label_familiarity("Singer", kb) == 1
        assert label_familiarity("Dancer", kb) == 0

    def test_familiarity_checksum(self, fixture_dir, fixture_stores):
        kb = fixture_stores.kbs["profession"]
        total_lines = len(
            (fixture_dir / "profession.kb").read_text(encoding="utf-8").splitlines()
        )
        assert sum(kb.familiarity(lb) for lb in kb.labels()) == total_lines

    def test_candidate_options(self):
        kb = KnowledgeBase("profession", {"A": ["Actor", "Singer"]})
        assert candidate_options("A", kb) == 2
        assert candidate_options("missing", kb) == 0


class TestExactCount:
    def test_phrase_counted_case_insensitively(self):
        result = build_person_docs(
            ["[A] a voice actor and voice actor ."],
            {"A"},
            EMPTY_STOPWORDS,
            phrase_targets={"A": ["Voice Actor"]},
        )
        doc = result.store.get("A")
        assert exact_count(doc, "Voice Actor") == 2
        assert exact_count(doc, "VOICE ACTOR") == 2
        assert exact_count(doc, "voice actor") == 2

    def test_absent_phrase_is_zero(self):
        result = build_person_docs(
            ["[A] only words ."], {"A"}, EMPTY_STOPWORDS, phrase_targets={"A": ["Singer"]}
        )
        assert exact_count(result.store.get("A"), "Singer") == 0

    def test_missing_doc_is_zero(self):
        assert exact_count(None, "Singer") == 0

    def test_unregistered_phrase_is_invariant_error(self):
        doc = PersonDoc("A", mention_count=1)
        with pytest.raises(InvariantError):
            exact_count(doc, "Never Registered")


class TestWeightedKeywordCount:
    def test_hand_computed_weights(self):
        doc = PersonDoc("P", 1, Counter({"top": 1, "second": 2}))
        assert weighted_keyword_count(doc, ranking("L", "top", "second")) == 2.0

    def test_no_keywords_present(self):
        doc = PersonDoc("P", 1, Counter({"other": 5}))
        assert weighted_keyword_count(doc, ranking("L", "top")) == 0.0

    def test_single_rank_one_hit(self):
        doc = PersonDoc("P", 1, Counter({"top": 1}))
        assert weighted_keyword_count(doc, ranking("L", "top", "second")) == 1.0

    def test_empty_ranking_or_doc(self):
        doc = PersonDoc("P", 1, Counter({"top": 1}))
        assert weighted_keyword_count(doc, KeywordRanking("L", [])) == 0.0
        assert weighted_keyword_count(doc, None) == 0.0
        assert weighted_keyword_count(None, ranking("L", "top")) == 0.0

    def test_top_cutoff_applied(self):
        terms = [f"t{i}" for i in range(30)]
        doc = PersonDoc("P", 1, Counter({t: 1 for t in terms}))
        value = weighted_keyword_count(doc, ranking("L", *terms), top=20)
        assert value == pytest.approx(sum(1.0 / r for r in range(1, 21)))

    def test_presence_mode(self):
        doc = PersonDoc("P", 1, Counter({"top": 5, "second": 2}))
        occ = weighted_keyword_count(doc, ranking("L", "top", "second"), mode="occurrence")
        pres = weighted_keyword_count(doc, ranking("L", "top", "second"), mode="presence")
        assert occ == 6.0
        assert pres == 1.5

    def test_monotone_in_occurrences(self):
        base = 0.0
        for count in range(0, 8):
            doc = PersonDoc("P", 1, Counter({"second": count}))
            value = weighted_keyword_count(doc, ranking("L", "top", "second"))
            assert value >= base
            base = value


class TestLrEstimate:
    def test_missing_model_is_error(self):
        store = PersonDocStore({})
        with pytest.raises(InvariantError):
            lr_estimate("P", "L", {}, store)

    def test_personless_estimate_uses_zero_counts(self):
        model = LogisticModel("L", ["kw"], [2.0], -1.0)
        store = PersonDocStore({})
        expected = 1.0 / (1.0 + math.exp(1.0))
        assert lr_estimate("ghost", "L", {"L": model}, store) == pytest.approx(expected)


class TestNormalize:
    def test_division_by_max(self):
        assert normalize_per_person({"Actor": 2.0, "Singer": 0.5}) == {
            "Actor": 1.0,
            "Singer": 0.25,
        }

    def test_all_zero(self):
        assert normalize_per_person({"a": 0.0, "b": 0.0}) == {"a": 0.0, "b": 0.0}

    def test_single_candidate(self):
        assert normalize_per_person({"X": 3.1}) == {"X": 1.0}

    def test_empty(self):
        assert normalize_per_person({}) == {}


def toy_context():
    kb = KnowledgeBase(
        "profession", {"P": ["Actor", "Singer"], "Q": ["Actor"], "R": ["Singer"]}
    )
    doc = PersonDoc(
        "P",
        mention_count=3,
        term_counts=Counter({"actor": 2, "film": 1, "song": 1}),
        phrase_counts={"actor": 2, "singer": 0},
    )
    docs = PersonDocStore({"P": doc})
    rankings = {
        "Actor": ranking("Actor", "actor", "film"),
        "Singer": ranking("Singer", "song"),
    }
    models = {
        "Actor": LogisticModel("Actor", ["actor"], [1.0], -1.0),
        "Singer": LogisticModel("Singer", ["song"], [0.5], 0.0),
    }
    return FeatureContext(kb, docs, rankings, models)


class TestFeatureContext:
    def test_hand_computed_vector(self):
        context = toy_context()
        fv = context.vector("P", "Actor")
        lr_actor = 1.0 / (1.0 + math.exp(-(2 * 1.0 - 1.0)))
        lr_singer = 1.0 / (1.0 + math.exp(-0.5))
        assert fv.person_popularity == 3
        assert fv.label_familiarity == 2
        assert fv.candidate_options == 2
        assert fv.exact_count == 2
        assert fv.weighted_keyword_count == pytest.approx(2 * 1.0 + 1 * 0.5)
        assert fv.lr_estimate == pytest.approx(lr_actor)
        assert fv.weighted_keyword_count_norm == 1.0
        assert fv.lr_estimate_norm == 1.0

        fv_singer = context.vector("P", "Singer")
        assert fv_singer.label_familiarity == 2
        assert fv_singer.exact_count == 0
        assert fv_singer.weighted_keyword_count == pytest.approx(1.0)
        assert fv_singer.weighted_keyword_count_norm == pytest.approx(1.0 / 2.5)
        assert fv_singer.lr_estimate == pytest.approx(lr_singer)
        assert fv_singer.lr_estimate_norm == pytest.approx(lr_singer / lr_actor)

    def test_argmax_labels_have_unit_norms(self, fixture_stores, fixture_config):
        from triplescore.pipeline import make_context

        context = make_context(fixture_stores, "profession", fixture_config)
        for person in fixture_stores.kbs["profession"].entries:
            vectors = context.vectors_for_person(person)
            wkc = {lb: fv.weighted_keyword_count for lb, fv in vectors.items()}
            if max(wkc.values()) > 0:
                top = max(wkc, key=wkc.get)
                assert vectors[top].weighted_keyword_count_norm == 1.0
            lr = {lb: fv.lr_estimate for lb, fv in vectors.items()}
            if max(lr.values()) > 0:
                top = max(lr, key=lr.get)
                assert vectors[top].lr_estimate_norm == 1.0

    def test_all_fixture_vectors_finite(self, fixture_stores, fixture_config):
        from triplescore.pipeline import make_context

        context = make_context(fixture_stores, "nationality", fixture_config)
        for person in fixture_stores.kbs["nationality"].entries:
            for fv in context.vectors_for_person(person).values():
                for value in fv.as_tuple():
                    assert math.isfinite(value)

    def test_vector_for_pair_outside_candidates(self):
        context = toy_context()
        fv = context.vector("Q", "Singer")  # Q only has Actor in the kb
        assert fv.candidate_options == 1
        assert fv.lr_estimate == 0.5  # no doc: zero counts through sigmoid(0)

    def test_cache_returns_same_object(self):
        context = toy_context()
        assert context.vectors_for_person("P") is context.vectors_for_person("P")


class TestVectorValidation:
    def test_nan_rejected(self):
        with pytest.raises(InvariantError):
            FeatureVector(1, 1, 1, 1, math.nan, 0.5, 0.5, 0.5)

    def test_negative_count_rejected(self):
        with pytest.raises(InvariantError):
            FeatureVector(-1, 1, 1, 1, 0.0, 0.5, 0.5, 0.5)

    def test_unit_interval_enforced(self):
        with pytest.raises(InvariantError):
            FeatureVector(1, 1, 1, 1, 0.0, 1.5, 0.5, 0.5)


class TestMatrixExport:
    def test_condition_columns(self):
        fv = FeatureVector(3, 2, 2, 1, 2.5, 0.7, 1.0, 1.0)
        full = feature_matrix([fv], "full")
        rel = feature_matrix([fv], "rel")
        assert full.shape == (1, 8)
        assert rel.shape == (1, 5)
        assert list(rel[0]) == [1.0, 2.5, 0.7, 1.0, 1.0]
        assert condition_feature_names("rel") == FEATURE_NAMES[3:]

    def test_write_feature_matrix_format(self, tmp_path):
        fv = FeatureVector(3, 2, 2, 1, 2.5, 0.7, 1.0, 1.0)
        path = tmp_path / "features.tsv"
        write_feature_matrix([("P", "Actor", fv)], path)
        line = path.read_text(encoding="utf-8").rstrip("\n")
        fields = line.split("\t")
        assert fields[:2] == ["P", "Actor"]
        assert fields[2:] == [
            "3.000000",
            "2.000000",
            "2.000000",
            "1.000000",
            "2.500000",
            "0.700000",
            "1.000000",
            "1.000000",
        ]
