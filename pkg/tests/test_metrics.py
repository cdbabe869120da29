from __future__ import annotations

import numpy as np
import pytest

from ovcd.errors import ValidationError
from ovcd.metrics import ClassScores, aggregate, evaluate, micro_average


def brute_counts(pred, gt, label):
    """Oracle: count tp/fp/fn with an explicit pixel loop."""
    tp = fp = fn = 0
    for y in range(pred.shape[0]):
        for x in range(pred.shape[1]):
            p = pred[y, x] == label
            g = gt[y, x] == label
            tp += p and g
            fp += p and not g
            fn += g and not p
    return tp, fp, fn


class TestClassScores:
    def test_identity_links_iou_and_f1(self):
        rng = np.random.default_rng(50)
        for _ in range(200):
            s = ClassScores("c", int(rng.integers(0, 1000)),
                            int(rng.integers(0, 1000)), int(rng.integers(0, 1000)))
            if s.absent:
                continue
            assert s.f1 == pytest.approx(2 * s.iou / (1 + s.iou), abs=1e-12)

    def test_hand_values(self):
        s = ClassScores("c", 366, 317, 317)
        assert s.iou == pytest.approx(366 / 1000)
        assert s.f1 == pytest.approx(732 / 1366)

    def test_absent_and_zero_denominators(self):
        s = ClassScores("c", 0, 0, 0)
        assert s.absent
        assert s.iou == 0.0 and s.f1 == 0.0
        assert not ClassScores("c", 0, 1, 0).absent

    def test_negative_counts_rejected(self):
        with pytest.raises(ValidationError):
            ClassScores("c", -1, 0, 0)

    def test_merged_requires_same_class(self):
        a = ClassScores("a", 1, 2, 3)
        assert a.merged(ClassScores("a", 10, 20, 30)) == ClassScores("a", 11, 22, 33)
        with pytest.raises(ValidationError):
            a.merged(ClassScores("b", 0, 0, 0))


class TestEvaluate:
    def test_perfect_prediction(self):
        gt = np.zeros((10, 10), dtype=np.uint8)
        gt[2:5, 2:5] = 1
        (s,) = evaluate(gt, gt, ["building"])
        assert (s.tp, s.fp, s.fn) == (9, 0, 0)
        assert s.iou == 1.0 and s.f1 == 1.0

    def test_all_background_is_absent(self):
        z = np.zeros((6, 6), dtype=np.uint8)
        (s,) = evaluate(z, z, ["building"])
        assert s.absent

    def test_hand_counts_two_classes(self):
        pred = np.zeros((4, 4), dtype=np.uint8)
        gt = np.zeros((4, 4), dtype=np.uint8)
        pred[0, :2] = 1   # one tp, one fp for class 1
        gt[0, 0] = 1
        gt[3, :3] = 2     # class 2 entirely missed
        s1, s2 = evaluate(pred, gt, ["a", "b"])
        assert (s1.tp, s1.fp, s1.fn) == (1, 1, 0)
        assert (s2.tp, s2.fp, s2.fn) == (0, 0, 3)

    def test_matches_pixel_loop_oracle(self):
        rng = np.random.default_rng(51)
        for _ in range(10):
            pred = rng.integers(0, 4, size=(9, 7)).astype(np.uint8)
            gt = rng.integers(0, 4, size=(9, 7)).astype(np.uint8)
            table = evaluate(pred, gt, ["a", "b", "c"])
            for i, s in enumerate(table):
                assert (s.tp, s.fp, s.fn) == brute_counts(pred, gt, i + 1)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            evaluate(np.zeros((2, 2)), np.zeros((3, 3)), ["a"])


class TestAggregate:
    def test_micro_sums_counts_before_ratios(self):
        t1 = [ClassScores("a", 1, 0, 1), ClassScores("b", 0, 0, 0)]
        t2 = [ClassScores("a", 3, 2, 0), ClassScores("b", 5, 0, 5)]
        agg = aggregate([t1, t2])
        assert agg == [ClassScores("a", 4, 2, 1), ClassScores("b", 5, 0, 5)]
        # Macro-averaging the per-pair IoUs would give a different number.
        assert agg[0].iou == pytest.approx(4 / 7)

    def test_preserves_first_seen_order(self):
        t1 = [ClassScores("b", 1, 0, 0)]
        t2 = [ClassScores("a", 1, 0, 0), ClassScores("b", 1, 0, 0)]
        assert [s.class_name for s in aggregate([t1, t2])] == ["b", "a"]

    def test_micro_average_collapses_classes(self):
        table = [ClassScores("a", 1, 2, 3), ClassScores("b", 10, 20, 30)]
        m = micro_average(table)
        assert (m.class_name, m.tp, m.fp, m.fn) == ("all", 11, 22, 33)
