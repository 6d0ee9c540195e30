from __future__ import annotations

import itertools
import random

import pytest

from triplescore.corpus import ScoredTriple
from triplescore.errors import MetricUndefinedError
from triplescore.metrics import (
    accuracy_at_2,
    asd,
    discrepancy,
    evaluate_predictions,
    group_indices_by_person,
    kendall_tau_distance,
    kfold_cv,
    make_folds,
)


def brute_asd(pred, truth):
    return sum(abs(p - t) for p, t in zip(pred, truth)) / len(pred)


def brute_accuracy(pred, truth):
    return len([1 for p, t in zip(pred, truth) if abs(p - t) <= 2]) / len(pred)


def brute_kendall(pred, truth, groups, tie_mode="half"):
    ratios = []
    for group in groups:
        disc = 0.0
        comp = 0
        for i, j in itertools.combinations(group, 2):
            if truth[i] == truth[j]:
                continue
            if pred[i] == pred[j]:
                if tie_mode == "half":
                    comp += 1
                    disc += 0.5
                continue
            comp += 1
            if (truth[i] < truth[j]) != (pred[i] < pred[j]):
                disc += 1
        if comp:
            ratios.append(disc / comp)
    if not ratios:
        raise MetricUndefinedError("no comparable pairs")
    return sum(ratios) / len(ratios)


class TestAsdAccuracy:
    def test_identical_lists(self):
        assert asd([1, 2, 3], [1, 2, 3]) == 0.0

    def test_maximal_difference(self):
        assert asd([0, 7], [7, 0]) == 7.0

    def test_accuracy_boundary_inclusive(self):
        assert accuracy_at_2([2, 4, 6], [0, 2, 4]) == 1.0

    def test_accuracy_all_outside(self):
        assert accuracy_at_2([3, 3], [0, 0]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            asd([1], [1, 2])
        with pytest.raises(ValueError):
            accuracy_at_2([1], [1, 2])

    def test_random_lists_match_direct_computation(self):
        rng = random.Random(3)
        for _ in range(200):
            n = rng.randint(1, 60)
            pred = [rng.randint(0, 7) for _ in range(n)]
            truth = [rng.randint(0, 7) for _ in range(n)]
            assert asd(pred, truth) == pytest.approx(brute_asd(pred, truth), abs=1e-12)
            assert accuracy_at_2(pred, truth) == pytest.approx(
                brute_accuracy(pred, truth), abs=1e-12
            )

    def test_permutation_invariance(self):
        rng = random.Random(8)
        pred = [rng.randint(0, 7) for _ in range(30)]
        truth = [rng.randint(0, 7) for _ in range(30)]
        order = list(range(30))
        rng.shuffle(order)
        assert asd(pred, truth) == pytest.approx(
            asd([pred[i] for i in order], [truth[i] for i in order])
        )
        assert accuracy_at_2(pred, truth) == pytest.approx(
            accuracy_at_2([pred[i] for i in order], [truth[i] for i in order])
        )


class TestKendall:
    def test_equal_distinct_scores(self):
        assert kendall_tau_distance([1, 2, 3], [1, 2, 3], [[0, 1, 2]]) == 0.0

    def test_exact_reversal(self):
        assert kendall_tau_distance([3, 2, 1], [1, 2, 3], [[0, 1, 2]]) == 1.0

    def test_truth_ties_excluded(self):
        # (0,1) truth-tied and dropped; (0,2) concordant, (1,2) discordant
        value = kendall_tau_distance([1, 5, 2], [3, 3, 4], [[0, 1, 2]])
        assert value == 0.5

    def test_pred_tie_half_counted(self):
        value = kendall_tau_distance([2, 2], [1, 4], [[0, 1]])
        assert value == 0.5

    def test_pred_tie_excluded_mode(self):
        # (0,1) pred-tied; (0,2) and (1,2) concordant
        pred, truth = [2, 2, 3], [1, 4, 5]
        half = kendall_tau_distance(pred, truth, [[0, 1, 2]], tie_mode="half")
        excl = kendall_tau_distance(pred, truth, [[0, 1, 2]], tie_mode="exclude")
        assert half == pytest.approx(0.5 / 3)
        assert excl == 0.0

    def test_small_groups_skipped(self):
        value = kendall_tau_distance([1, 9, 8], [1, 2, 3], [[0], [1, 2]])
        assert value == 1.0

    def test_no_comparable_pairs_is_error(self):
        with pytest.raises(MetricUndefinedError):
            kendall_tau_distance([1, 2], [3, 3], [[0, 1]])

    def test_random_instances_match_enumeration(self):
        rng = random.Random(12)
        for _ in range(200):
            n = rng.randint(2, 40)
            pred = [rng.randint(0, 7) for _ in range(n)]
            truth = [rng.randint(0, 7) for _ in range(n)]
            groups = []
            idx = list(range(n))
            rng.shuffle(idx)
            while idx:
                take = min(len(idx), rng.randint(1, 5))
                groups.append(idx[:take])
                idx = idx[take:]
            for mode in ("half", "exclude"):
                try:
                    want = brute_kendall(pred, truth, groups, mode)
                except MetricUndefinedError:
                    with pytest.raises(MetricUndefinedError):
                        kendall_tau_distance(pred, truth, groups, mode)
                    continue
                got = kendall_tau_distance(pred, truth, groups, mode)
                assert got == pytest.approx(want, abs=1e-12)

    def test_monotone_transform_invariance(self):
        rng = random.Random(21)
        for _ in range(50):
            n = rng.randint(2, 20)
            pred = [rng.randint(0, 7) for _ in range(n)]
            truth = [rng.randint(0, 7) for _ in range(n)]
            groups = [list(range(n))]
            try:
                base = kendall_tau_distance(pred, truth, groups)
            except MetricUndefinedError:
                continue
            transformed = [3.5 * p + 11 for p in pred]
            assert kendall_tau_distance(transformed, truth, groups) == pytest.approx(
                base
            )


class TestDiscrepancy:
    def test_known_values(self):
        assert discrepancy(0) == 0
        assert discrepancy(7) == 0
        assert discrepancy(1) == 1
        assert discrepancy(6) == 1
        assert discrepancy(3) == 3
        assert discrepancy(4) == 3

    def test_symmetry(self):
        for s in range(8):
            assert discrepancy(s) == discrepancy(7 - s)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            discrepancy(8)
        with pytest.raises(ValueError):
            discrepancy(-1)


def triples_from(rows):
    return [ScoredTriple(p, l, s) for p, l, s in rows]


class TestKfold:
    def test_fold_shapes_and_determinism(self):
        folds_a = make_folds(23, 10, seed=4)
        folds_b = make_folds(23, 10, seed=4)
        assert folds_a == folds_b
        sizes = sorted(len(f) for f in folds_a)
        assert sum(sizes) == 23
        assert max(sizes) - min(sizes) <= 1
        assert sorted(i for f in folds_a for i in f) == list(range(23))

    def test_person_grouped_folds(self):
        persons = ["A", "B", "A", "C", "B", "A"]
        folds = make_folds(len(persons), 3, seed=1, persons=persons)
        fold_of = {}
        for f, members in enumerate(folds):
            for i in members:
                fold_of[persons[i]] = fold_of.get(persons[i], f)
                assert fold_of[persons[i]] == f

    def test_k_less_than_2_is_error(self):
        with pytest.raises(ValueError):
            make_folds(10, 1, seed=0)
        with pytest.raises(ValueError):
            kfold_cv(triples_from([("A", "x", 1)] * 4), lambda a, b: [1] * len(b), k=1)

    def test_fewer_triples_than_folds_is_error(self):
        with pytest.raises(ValueError):
            kfold_cv(triples_from([("A", "x", 1)] * 4), lambda a, b: [], k=5)

    def test_same_seed_identical_report(self):
        rng = random.Random(0)
        triples = triples_from(
            [(f"P{i % 5}", f"L{i}", rng.randint(0, 7)) for i in range(24)]
        )

        def fit_predict(train, test):
            mean = round(sum(t.score for t in train) / len(train))
            return [mean] * len(test)

        a = kfold_cv(triples, fit_predict, k=10, seed=3)
        b = kfold_cv(triples, fit_predict, k=10, seed=3)
        assert a == b

    def test_memorizing_learner_matches_direct_loo(self):
        rng = random.Random(6)
        rows = []
        for i in range(12):
            rows.append((f"P{i % 4}", f"L{i % 6}", rng.randint(0, 7)))
        triples = triples_from(rows)
        n = len(triples)

        def memorize(train, test):
            table = {}
            for t in train:
                table.setdefault((t.person, t.label), t.score)
            return [table.get((t.person, t.label), 4) for t in test]

        report = kfold_cv(triples, memorize, k=n, seed=9)

        # direct leave-one-out of the same degenerate learner
        loo_pred = []
        for i, t in enumerate(triples):
            rest = triples[:i] + triples[i + 1 :]
            loo_pred.append(memorize(rest, [t])[0])
        assert report.asd == pytest.approx(
            brute_asd(loo_pred, [t.score for t in triples])
        )

    def test_group_by_person_keeps_person_out_of_train(self):
        triples = triples_from(
            [(f"P{i % 6}", f"L{j}", (i + j) % 8) for i in range(6) for j in range(3)]
        )

        def check_fit(train, test):
            train_persons = {t.person for t in train}
            for t in test:
                assert t.person not in train_persons
            return [4] * len(test)

        kfold_cv(triples, check_fit, k=3, seed=2, group_by_person=True)


class TestEvaluatePredictions:
    def test_report_fields(self):
        triples = triples_from(
            [("A", "x", 0), ("A", "y", 7), ("B", "x", 3), ("B", "y", 5)]
        )
        report = evaluate_predictions([0, 7, 6, 3], triples)
        assert report.n == 4
        assert report.asd == 1.25
        assert report.accuracy == pytest.approx(0.75)
        assert report.kendall == pytest.approx(0.5)  # A perfect, B reversed

    def test_groups_by_person(self):
        triples = triples_from([("A", "x", 1), ("B", "x", 2), ("A", "y", 3)])
        assert group_indices_by_person(triples) == [[0, 2], [1]]
