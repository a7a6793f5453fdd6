import math

import numpy as np
import pytest

from rebalance.errors import InputError, StratificationError, UndefinedMetricError
from rebalance.metrics_eval import (
    ConfusionCounts,
    FoldMetrics,
    aggregate,
    auc,
    confusion,
    dispersion_summary,
    evaluate_fold,
    paired_t_test,
    precision_recall_f1,
    stratified_kfold,
    t_cdf,
)
from rebalance.oracles import oracle_auc, oracle_t_cdf


def _fold(f1=0.5, auc_value=0.5):
    return FoldMetrics(precision=f1, recall=f1, f1=f1, auc=auc_value)


class TestConfusion:
    def test_one_of_each(self):
        assert confusion([1, 1, 0, 0], [1, 0, 1, 0]) == ConfusionCounts(tp=1, fn=1, fp=1, tn=1)

    def test_perfect(self):
        c = confusion([1, 0, 1, 0, 0], [1, 0, 1, 0, 0])
        assert (c.fn, c.fp, c.total) == (0, 0, 5)

    def test_all_negative_prediction(self):
        assert confusion([1, 1, 1], [0, 0, 0]) == ConfusionCounts(tp=0, fn=3, fp=0, tn=0)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            confusion([1, 0], [1])


class TestPrecisionRecall:
    @pytest.mark.parametrize(
        "tp,fp,fn,expected",
        [(8, 2, 2, (0.8, 0.8, 0.8)), (0, 0, 5, (0.0, 0.0, 0.0)), (6, 2, 4, (0.75, 0.6, 2 / 3))],
    )
    def test_values(self, tp, fp, fn, expected):
        got = precision_recall_f1(ConfusionCounts(tp=tp, fn=fn, fp=fp, tn=10))
        assert got == pytest.approx(expected)

    def test_f1_equals_precision_when_recall_does(self, rng):
        for _ in range(100):
            tp = int(rng.integers(1, 50))
            miss = int(rng.integers(0, 50))
            p, r, f1 = precision_recall_f1(ConfusionCounts(tp=tp, fn=miss, fp=miss, tn=0))
            assert p == r
            assert f1 == pytest.approx(p, rel=1e-15)


class TestAuc:
    def test_perfect_order(self):
        assert auc([1, 1, 0, 0], [0.9, 0.8, 0.2, 0.1]) == 1.0

    def test_all_ties(self):
        assert auc([1, 0, 1, 0, 0], [0.3] * 5) == 0.5

    def test_hand_example(self):
        assert auc([1, 1, 0, 0], [0.9, 0.4, 0.6, 0.2]) == 0.75

    def test_single_class(self):
        with pytest.raises(UndefinedMetricError):
            auc([1, 1, 1], [0.1, 0.2, 0.3])

    def test_matches_pair_scan(self, rng):
        for _ in range(1000):
            n = int(rng.integers(2, 31))
            y = rng.integers(0, 2, size=n)
            if y.min() == y.max():
                y[0] = 1 - y[0]
            # coarse scores force plenty of ties
            s = np.round(rng.random(n), 1)
            assert auc(y, s) == float(oracle_auc(y.tolist(), s.tolist()).value)

    def test_monotone_transform_invariance(self, rng):
        y = np.array([1, 0] * 20)
        s = rng.random(40)
        assert auc(y, s) == pytest.approx(auc(y, np.exp(3 * s) - 7))


class TestEvaluateFold:
    def test_threshold_at_half(self):
        m = evaluate_fold([1, 1, 0, 0], [0.5, 0.4, 0.6, 0.1], fold_index=3, repeat_index=1)
        assert (m.precision, m.recall, m.f1) == (0.5, 0.5, 0.5)
        assert m.auc == 0.5
        assert (m.fold_index, m.repeat_index) == (3, 1)

    def test_single_class_fold_aborts(self):
        with pytest.raises(StratificationError):
            evaluate_fold([0, 0, 0], [0.1, 0.9, 0.4])

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            FoldMetrics(precision=float("nan"), recall=0.0, f1=0.0, auc=0.5)


class TestStratifiedKfold:
    def test_exact_division(self):
        labels = np.array([1] * 10 + [0] * 90)
        splits = stratified_kfold(labels, 10, seed=1)
        assert len(splits) == 10
        for _, test in splits:
            assert labels[test].sum() == 1
            assert len(test) == 10

    def test_partition(self, rng):
        labels = (rng.random(137) < 0.2).astype(int)
        splits = stratified_kfold(labels, 5, seed=2)
        tests = np.concatenate([t for _, t in splits])
        assert sorted(tests.tolist()) == list(range(137))
        for train, test in splits:
            assert not set(train) & set(test)
            assert len(train) + len(test) == 137

    def test_haberman_counts(self):
        labels = np.array([1] * 81 + [0] * 225)
        counts = {int(labels[test].sum()) for _, test in stratified_kfold(labels, 10, seed=3)}
        assert counts <= {8, 9}

    def test_deterministic(self):
        labels = np.array([1] * 20 + [0] * 60)
        a = stratified_kfold(labels, 4, seed=5)
        b = stratified_kfold(labels, 4, seed=5)
        assert all(np.array_equal(x[1], y[1]) for x, y in zip(a, b))

    def test_class_too_small(self):
        with pytest.raises(StratificationError):
            stratified_kfold([1] * 3 + [0] * 50, 10, seed=0)

    def test_large_seed(self):
        labels = np.array([1] * 10 + [0] * 30)
        assert len(stratified_kfold(labels, 5, seed=2**62 + 11)) == 5


class TestPairedTTest:
    def test_identical(self):
        r = paired_t_test([0.5, 0.6, 0.7], [0.5, 0.6, 0.7])
        assert (r.t_stat, r.p_value, r.significant) == (0.0, 1.0, False)

    def test_differences_one_two_three(self):
        r = paired_t_test([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
        assert r.t_stat == pytest.approx(2 * math.sqrt(3))
        assert r.p_value == pytest.approx(0.0742, abs=1e-4)
        assert not r.significant
        assert r.mean_difference == pytest.approx(2.0)

    def test_constant_shift(self):
        r = paired_t_test([2.0, 3.0, 4.0], [1.0, 2.0, 3.0])
        assert r.significant
        assert r.p_value == 0.0
        assert r.t_stat == math.inf

    def test_antisymmetric(self, rng):
        a, b = rng.random(30), rng.random(30)
        ab, ba = paired_t_test(a, b), paired_t_test(b, a)
        assert ab.t_stat == pytest.approx(-ba.t_stat)
        assert ab.p_value == pytest.approx(ba.p_value)

    def test_p_value_matches_integrated_density(self, rng):
        for _ in range(20):
            a, b = rng.random(10), rng.random(10)
            r = paired_t_test(a, b)
            expected = 2 * (1 - oracle_t_cdf(abs(r.t_stat), 9).value)
            assert r.p_value == pytest.approx(expected, abs=1e-8)

    @pytest.mark.parametrize("a,b", [([1.0], [2.0]), ([1.0, 2.0], [1.0])])
    def test_bad_lengths(self, a, b):
        with pytest.raises(InputError):
            paired_t_test(a, b)


@pytest.mark.parametrize("t", [-4.0, -1.3, -0.2, 0.0, 0.7, 2.1, 6.5])
@pytest.mark.parametrize("df", [1, 2, 5, 29])
def test_t_cdf_matches_integration(t, df):
    assert t_cdf(t, df) == pytest.approx(oracle_t_cdf(t, df).value, abs=1e-7)


class TestAggregate:
    def test_constant(self):
        s = aggregate([_fold(0.5)] * 3)["f1"]
        assert (s.mean, s.std) == (0.5, 0.0)

    def test_two_points(self):
        s = aggregate([_fold(0.4), _fold(0.6)])["f1"]
        assert s.mean == pytest.approx(0.5)
        assert s.std == pytest.approx(math.sqrt(0.02))

    def test_single_entry_has_no_std(self):
        s = aggregate([_fold(0.7, 0.8)])
        assert s["auc"].mean == 0.8
        assert s["auc"].std is None

    def test_empty(self):
        with pytest.raises(InputError):
            aggregate([])


def test_dispersion_summary_columns():
    frame = dispersion_summary(
        {
            "smote": [{"precision": 0.5, "recall": 0.5, "f1": 0.4, "auc": 0.7},
                      {"precision": 0.5, "recall": 0.5, "f1": 0.6, "auc": 0.7}],
            "deep_smote": [{"precision": 0.5, "recall": 0.5, "f1": 0.5, "auc": 0.7}] * 2,
        }
    )
    assert frame["method"].tolist() == ["deep_smote", "smote"]
    assert frame.loc[1, "f1_std"] == pytest.approx(math.sqrt(0.02))
    assert frame.loc[0, "f1_std"] == 0.0
    assert frame.loc[0, "runs"] == 2
